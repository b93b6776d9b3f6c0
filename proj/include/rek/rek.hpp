#pragma once

#include "rek/bench.hpp"
#include "rek/bounds.hpp"
#include "rek/errors.hpp"
#include "rek/gen.hpp"
#include "rek/io.hpp"
#include "rek/matrix.hpp"
#include "rek/reference.hpp"
#include "rek/rng.hpp"
#include "rek/sampling.hpp"
#include "rek/solvers.hpp"
#include "rek/verify.hpp"
