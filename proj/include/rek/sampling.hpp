#pragma once

// Walker/Vose alias tables: O(size) construction, O(1) exact sampling
// from a discrete distribution given by non-negative weights.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rek/errors.hpp"
#include "rek/matrix.hpp"
#include "rek/rng.hpp"

namespace rek {

class AliasTable {
public:
    static AliasTable build(std::span<const double> weights) {
        if (weights.empty()) throw DegenerateWeights("alias table: no weights");
        double peak = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            const double w = weights[k];
            if (!std::isfinite(w) || w < 0.0) {
                throw DegenerateWeights("alias table: weight " + std::to_string(k) + " is negative or not finite");
            }
            peak = std::max(peak, w);
        }
        if (!(peak > 0.0)) throw DegenerateWeights("alias table: all weights are zero");
        // Normalizing by the largest weight keeps the sum finite.
        double total = 0.0;
        for (double w : weights) total += w / peak;

        const std::size_t n = weights.size();
        AliasTable t;
        t.prob_.assign(n, 0.0);
        t.alias_.resize(n);
        std::vector<double> scaled(n);
        std::vector<std::size_t> small, large;
        small.reserve(n);
        large.reserve(n);
        std::size_t anyPositive = 0;
        for (std::size_t k = 0; k < n; ++k) {
            t.alias_[k] = k;
            scaled[k] = weights[k] / peak / total * double(n);
            if (weights[k] > 0.0) anyPositive = k;
            (scaled[k] < 1.0 ? small : large).push_back(k);
        }
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back();
            small.pop_back();
            const std::size_t l = large.back();
            t.prob_[s] = scaled[s];
            t.alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        // Leftovers carry mass ~1 up to rounding. A zero-weight leftover
        // can only arise from rounding and must stay unreachable.
        for (std::size_t k : large) t.prob_[k] = 1.0;
        for (std::size_t k : small) {
            if (weights[k] > 0.0) {
                t.prob_[k] = 1.0;
            } else {
                t.prob_[k] = 0.0;
                t.alias_[k] = anyPositive;
            }
        }
        return t;
    }

    std::size_t size() const noexcept { return prob_.size(); }
    std::span<const double> prob() const noexcept { return prob_; }
    std::span<const std::size_t> alias() const noexcept { return alias_; }

    /// One uniform draw picks the column, a second one flips its coin.
    std::size_t sample(RngStream& rng) const noexcept {
        const std::size_t n = prob_.size();
        std::size_t k = std::size_t(rng.uniform() * double(n));
        if (k >= n) k = n - 1;
        return rng.uniform() < prob_[k] ? k : alias_[k];
    }

    /// Probability mass the table assigns to every index.
    std::vector<double> reconstructedMass() const {
        const std::size_t n = prob_.size();
        std::vector<double> mass(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            mass[k] += prob_[k];
            mass[alias_[k]] += 1.0 - prob_[k];
        }
        for (double& m : mass) m /= double(n);
        return mass;
    }

private:
    AliasTable() = default;

    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
};

inline AliasTable buildAlias(std::span<const double> weights) { return AliasTable::build(weights); }

/// q_i = |a^(i)|^2 / |A|_F^2
inline AliasTable rowSampler(const DualSparseMatrix& A) { return AliasTable::build(A.rowSqNorms()); }

/// p_j = |a_(j)|^2 / |A|_F^2
inline AliasTable colSampler(const DualSparseMatrix& A) { return AliasTable::build(A.colSqNorms()); }

}  // namespace rek
