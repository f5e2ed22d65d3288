#ifndef QPKT_FIXTURES_HPP
#define QPKT_FIXTURES_HPP

#include <vector>

#include "qpkt/field.hpp"

namespace qpkt {

// Deterministic synthetic fields for tests, demos, and benchmarks.  All are
// strictly positive so logarithm- and root-style quantities stay in domain,
// and a given (shape, seed) pair reproduces bit-identical values anywhere.

// Smooth sum of per-axis waves, values in about [1.3, 3.7].
Field sinusoid_field(std::vector<size_t> shape, unsigned seed = 1);

// Rough positive data: per-point lognormal samples, box-smoothed once along
// each axis to give the predictor something to work with.
Field lognormal_field(std::vector<size_t> shape, unsigned seed = 1,
                      double sigma = 1.2);

// Piecewise-constant tiles drawn from a small positive palette.
Field plateau_field(std::vector<size_t> shape, unsigned seed = 1,
                    size_t tile = 8);

// Same values re-labeled, rounded through the narrower width when needed.
Field with_dtype(Field f, Dtype dtype);

}  // namespace qpkt

#endif
