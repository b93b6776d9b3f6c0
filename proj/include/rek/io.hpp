#pragma once

// Matrix Market (coordinate and array, real general) reading and
// writing, plus the CSV format of benchmark records. Floating-point
// values are written with 17 significant digits, which round-trips
// every double exactly.

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "rek/errors.hpp"
#include "rek/matrix.hpp"

namespace rek {

inline std::string formatDouble(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t k = 0;
    while (k < line.size()) {
        while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
        const std::size_t start = k;
        while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
        if (k > start) out.push_back(line.substr(start, k - start));
    }
    return out;
}

inline double parseDouble(std::string_view tok, std::size_t line) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw ParseError(line, "invalid number '" + std::string(tok) + "'");
    }
    return v;
}

inline std::uint64_t parseCount(std::string_view tok, std::size_t line) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw ParseError(line, "invalid integer '" + std::string(tok) + "'");
    }
    return v;
}

}  // namespace detail

using MatrixData = std::variant<DualSparseMatrix, DenseMatrix>;

namespace detail {

struct RawMatrix {
    bool coordinate = false;
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<Triplet> triplets;  // coordinate format, 0-based
    Vector colMajor;                // array format
};

inline RawMatrix parseMatrixMarket(std::istream& in) {
    std::string line;
    std::size_t lineNo = 0;
    if (!std::getline(in, line)) throw ParseError(1, "empty input");
    ++lineNo;
    const auto head = detail::tokens(line);
    if (head.size() != 5 || detail::lower(head[0]) != "%%matrixmarket" || detail::lower(head[1]) != "matrix") {
        throw ParseError(lineNo, "missing %%MatrixMarket matrix header");
    }
    const std::string format = detail::lower(head[2]);
    const std::string field = detail::lower(head[3]);
    const std::string symmetry = detail::lower(head[4]);
    if (format != "coordinate" && format != "array") throw ParseError(lineNo, "unknown format '" + format + "'");
    if (field != "real" && field != "integer" && field != "double") {
        throw UnsupportedField("unsupported field '" + field + "' (only real matrices are supported)");
    }
    if (symmetry != "general") throw UnsupportedField("unsupported symmetry '" + symmetry + "' (only general)");

    // Size line: first non-comment, non-blank line.
    std::vector<std::string_view> size;
    std::string sizeLine;
    while (std::getline(in, sizeLine)) {
        ++lineNo;
        if (sizeLine.empty() || sizeLine[0] == '%') continue;
        size = detail::tokens(sizeLine);
        if (!size.empty()) break;
    }
    const std::size_t expected = format == "coordinate" ? 3 : 2;
    if (size.size() != expected) throw ParseError(lineNo, "malformed size line");
    const std::size_t m = detail::parseCount(size[0], lineNo);
    const std::size_t n = detail::parseCount(size[1], lineNo);
    if (m == 0 || n == 0) throw ParseError(lineNo, "dimensions must be positive");

    if (format == "coordinate") {
        const std::size_t entries = detail::parseCount(size[2], lineNo);
        std::vector<Triplet> t;
        t.reserve(entries);
        while (t.size() < entries && std::getline(in, line)) {
            ++lineNo;
            if (line.empty() || line[0] == '%') continue;
            const auto tok = detail::tokens(line);
            if (tok.empty()) continue;
            if (tok.size() != 3) throw ParseError(lineNo, "expected 'row col value'");
            const std::size_t r = detail::parseCount(tok[0], lineNo);
            const std::size_t c = detail::parseCount(tok[1], lineNo);
            if (r == 0 || c == 0 || r > m || c > n) throw ParseError(lineNo, "index outside matrix");
            const double v = detail::parseDouble(tok[2], lineNo);
            if (!std::isfinite(v)) throw ParseError(lineNo, "non-finite value");
            t.push_back({r - 1, c - 1, v});
        }
        if (t.size() != entries) throw ParseError(lineNo, "expected " + std::to_string(entries) + " entries");
        return {true, m, n, std::move(t), {}};
    }

    Vector colMajor;
    colMajor.reserve(m * n);
    while (colMajor.size() < m * n && std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '%') continue;
        for (auto tok : detail::tokens(line)) colMajor.push_back(detail::parseDouble(tok, lineNo));
    }
    if (colMajor.size() != m * n) throw ParseError(lineNo, "expected " + std::to_string(m * n) + " array values");
    if (!allFinite(colMajor)) throw ParseError(lineNo, "non-finite value");
    return {false, m, n, {}, std::move(colMajor)};
}

inline DenseMatrix toDense(const RawMatrix& raw) {
    DenseMatrix D(raw.m, raw.n);
    if (raw.coordinate) {
        for (const auto& t : raw.triplets) D(t.row, t.col) += t.value;
    } else {
        for (std::size_t j = 0; j < raw.n; ++j) {
            for (std::size_t i = 0; i < raw.m; ++i) D(i, j) = raw.colMajor[j * raw.m + i];
        }
    }
    return D;
}

}  // namespace detail

/// Coordinate files become a DualSparseMatrix (duplicates summed), array
/// files a DenseMatrix.
inline MatrixData readMatrixMarket(std::istream& in) {
    detail::RawMatrix raw = detail::parseMatrixMarket(in);
    if (raw.coordinate) return DualSparseMatrix::fromTriplets(raw.triplets, raw.m, raw.n);
    return detail::toDense(raw);
}

inline MatrixData readMatrixMarket(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return readMatrixMarket(in);
}

/// Sparse view of either storage form.
inline DualSparseMatrix asSparse(MatrixData data) {
    if (auto* s = std::get_if<DualSparseMatrix>(&data)) return std::move(*s);
    return DualSparseMatrix::fromDense(std::get<DenseMatrix>(data));
}

/// A vector stored as an m x 1 (or 1 x n) matrix in either format.
inline Vector readVector(std::istream& in) {
    const DenseMatrix D = detail::toDense(detail::parseMatrixMarket(in));
    if (D.cols() != 1 && D.rows() != 1) throw DimensionMismatch("vector file must have a single row or column");
    return Vector(D.data().begin(), D.data().end());
}

inline Vector readVector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return readVector(in);
}

inline void writeMatrixMarket(const DualSparseMatrix& A, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
    for (const auto& t : A.triplets()) out << t.row + 1 << ' ' << t.col + 1 << ' ' << formatDouble(t.value) << '\n';
}

inline void writeMatrixMarket(const DenseMatrix& A, std::ostream& out) {
    out << "%%MatrixMarket matrix array real general\n";
    out << A.rows() << ' ' << A.cols() << '\n';
    for (std::size_t j = 0; j < A.cols(); ++j) {
        for (std::size_t i = 0; i < A.rows(); ++i) out << formatDouble(A(i, j)) << '\n';
    }
}

inline void writeVector(std::span<const double> v, std::ostream& out) {
    out << "%%MatrixMarket matrix array real general\n";
    out << v.size() << " 1\n";
    for (double e : v) out << formatDouble(e) << '\n';
}

namespace detail {

template <class Writer>
void writeFile(const std::string& path, Writer&& write) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write(out);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

inline void writeMatrixMarket(const DualSparseMatrix& A, const std::string& path) {
    detail::writeFile(path, [&](std::ostream& o) { writeMatrixMarket(A, o); });
}
inline void writeMatrixMarket(const DenseMatrix& A, const std::string& path) {
    detail::writeFile(path, [&](std::ostream& o) { writeMatrixMarket(A, o); });
}
inline void writeVector(std::span<const double> v, const std::string& path) {
    detail::writeFile(path, [&](std::ostream& o) { writeVector(v, o); });
}

// Benchmark records ------------------------------------------------------------

struct BenchRecord {
    std::string instance;
    std::string solver;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t nnz = 0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t iters = 0;
    std::uint64_t flops = 0;
    double wallTime = 0.0;
    double residualNorm = 0.0;
    double atzNorm = 0.0;
    std::optional<double> forwardErr;  // empty when the oracle was skipped
    bool converged = false;
    std::string error;                 // non-empty on a failed row
};

inline constexpr std::string_view kCsvHeader =
    "instance,solver,m,n,nnz,eps,seed,iters,flops,wall_time,residual_norm,atz_norm,forward_err,converged,error";

inline std::string csvField(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return out;
}

inline void writeCsv(const std::vector<BenchRecord>& records, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << csvField(r.instance) << ',' << csvField(r.solver) << ',' << r.m << ',' << r.n << ',' << r.nnz << ','
            << formatDouble(r.eps) << ',' << r.seed << ',' << r.iters << ',' << r.flops << ','
            << formatDouble(r.wallTime) << ',' << formatDouble(r.residualNorm) << ',' << formatDouble(r.atzNorm)
            << ',' << (r.forwardErr ? formatDouble(*r.forwardErr) : std::string()) << ','
            << (r.converged ? 1 : 0) << ',' << csvField(r.error) << '\n';
    }
}

inline void writeCsv(const std::vector<BenchRecord>& records, const std::string& path) {
    detail::writeFile(path, [&](std::ostream& o) { writeCsv(records, o); });
}

inline std::vector<BenchRecord> readCsv(std::istream& in) {
    std::string line;
    std::size_t lineNo = 1;
    if (!std::getline(in, line) || line != kCsvHeader) throw ParseError(1, "unexpected CSV header");
    std::vector<BenchRecord> out;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 15) throw ParseError(lineNo, "expected 15 fields");
        BenchRecord r;
        r.instance = f[0];
        r.solver = f[1];
        r.m = detail::parseCount(f[2], lineNo);
        r.n = detail::parseCount(f[3], lineNo);
        r.nnz = detail::parseCount(f[4], lineNo);
        r.eps = detail::parseDouble(f[5], lineNo);
        r.seed = detail::parseCount(f[6], lineNo);
        r.iters = detail::parseCount(f[7], lineNo);
        r.flops = detail::parseCount(f[8], lineNo);
        r.wallTime = detail::parseDouble(f[9], lineNo);
        r.residualNorm = detail::parseDouble(f[10], lineNo);
        r.atzNorm = detail::parseDouble(f[11], lineNo);
        if (!f[12].empty()) r.forwardErr = detail::parseDouble(f[12], lineNo);
        r.converged = f[13] == "1";
        r.error = f[14];
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace rek
