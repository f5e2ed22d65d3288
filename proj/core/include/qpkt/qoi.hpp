#ifndef QPKT_QOI_HPP
#define QPKT_QOI_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qpkt/expr.hpp"
#include "qpkt/field.hpp"

namespace qpkt {

// What a preserved quantity looks like:
//  - Univariate: one scalar expression applied point by point.
//  - RegionalLinear: C + sum_j alpha_j * g(x_j) over a tiled block, with
//    uniform or weighted coefficients (averages by default).
//  - MultivariateGeneral: F(x, y, ...) over co-located points of several
//    fields of the same shape.
enum class QoiKind : uint8_t {
    Univariate = 1,
    RegionalLinear = 2,
    MultivariateGeneral = 3,
};

enum class CoeffRule : uint8_t {
    Average = 0,   // alpha_j = 1/n for the n points actually in the block
    Sum = 1,       // alpha_j = 1
    Weighted = 2,  // alpha_j = w_j / sum(w) over the block's points
};

struct QoiSpec {
    QoiKind kind = QoiKind::Univariate;
    DerivativeBundle bundle;          // f, g, or F with its derivatives
    std::string text;                 // canonical expression text
    std::vector<std::string> vars;    // declared variable names
    std::vector<size_t> block;        // RegionalLinear tile shape
    CoeffRule coeff_rule = CoeffRule::Average;
    std::vector<double> weights;      // CoeffRule::Weighted, row-major in-block
    double constant = 0.0;            // RegionalLinear offset C
    size_t arity = 1;                 // number of bound fields
};

QoiSpec make_univariate_qoi(std::string_view expr);
QoiSpec make_regional_qoi(std::string_view inner_expr, std::vector<size_t> block,
                          CoeffRule rule = CoeffRule::Average,
                          std::vector<double> weights = {}, double constant = 0.0);
QoiSpec make_multivariate_qoi(std::string_view expr,
                              std::vector<std::string> vars);

// One tile of a RegionalLinear partition, clipped at the upper edges.
struct Region {
    std::vector<size_t> origin;
    std::vector<size_t> extent;
    size_t count() const {
        size_t n = 1;
        for (size_t e : extent) n *= e;
        return n;
    }
};

// Row-major tiling of `shape` into `block`-sized regions.  Every index lands
// in exactly one region.
class RegionIter {
  public:
    RegionIter(std::span<const size_t> shape, std::span<const size_t> block);
    bool next(Region& out);             // false when exhausted
    size_t region_count() const;
    // Flat row-major indices of a region's members, appended to `out`.
    void member_indices(const Region& r, std::vector<size_t>& out) const;

  private:
    std::vector<size_t> shape_, block_, cursor_;
    bool done_ = false;
};

struct DomainError : std::runtime_error {
    size_t index;  // flat index of the offending input point
    DomainError(const std::string& msg, size_t idx)
        : std::runtime_error(msg), index(idx) {}
};

// Evaluates the quantity over the inputs.  Univariate/multivariate outputs
// share the input shape; regional outputs have one value per region
// (ceil(extent/block) per dimension).  A non-finite result throws
// DomainError with the flat index where it happened, unless allow_nonfinite
// lets such values flow through (validation and reporting use that).
Field evaluate_qoi(const QoiSpec& spec, std::span<const Field> fields,
                   bool allow_nonfinite = false);

struct QoiRange {
    double lo = 0.0, hi = 0.0;
    bool degenerate = false;  // hi == lo
    double width() const { return hi - lo; }
};

QoiRange qoi_value_range(const QoiSpec& spec, std::span<const Field> fields);

// Per-point coefficients for one region under the quantity's rule, in
// member_indices order; clipped edge blocks renormalize so averages stay
// averages.
std::vector<double> region_coefficients(const QoiSpec& spec, const Region& r);

}  // namespace qpkt

#endif
