#include "qpkt/qoi.hpp"

#include <cmath>
#include <stdexcept>

namespace qpkt {

QoiSpec make_univariate_qoi(std::string_view expr) {
    QoiSpec s;
    s.kind = QoiKind::Univariate;
    s.vars = {"x"};
    s.bundle = analyze(expr, s.vars);
    s.text = print(*s.bundle.f);
    s.arity = 1;
    return s;
}

QoiSpec make_regional_qoi(std::string_view inner_expr, std::vector<size_t> block,
                          CoeffRule rule, std::vector<double> weights,
                          double constant) {
    if (block.empty()) throw std::invalid_argument("regional block shape is empty");
    for (size_t b : block)
        if (b == 0) throw std::invalid_argument("regional block extent is zero");
    QoiSpec s;
    s.kind = QoiKind::RegionalLinear;
    s.vars = {"x"};
    s.bundle = analyze(inner_expr, s.vars);
    s.text = print(*s.bundle.f);
    s.block = std::move(block);
    s.coeff_rule = rule;
    s.weights = std::move(weights);
    s.constant = constant;
    s.arity = 1;
    if (rule == CoeffRule::Weighted) {
        size_t n = 1;
        for (size_t b : s.block) n *= b;
        if (s.weights.size() != n)
            throw std::invalid_argument("weight count does not match block size");
    }
    return s;
}

QoiSpec make_multivariate_qoi(std::string_view expr,
                              std::vector<std::string> vars) {
    if (vars.empty()) throw std::invalid_argument("no variables declared");
    QoiSpec s;
    s.kind = QoiKind::MultivariateGeneral;
    s.vars = std::move(vars);
    s.bundle = analyze(expr, s.vars);
    s.text = print(*s.bundle.f);
    s.arity = s.vars.size();
    return s;
}

// ---------------------------------------------------------------------------

RegionIter::RegionIter(std::span<const size_t> shape, std::span<const size_t> block)
    : shape_(shape.begin(), shape.end()), block_(block.begin(), block.end()),
      cursor_(shape.size(), 0) {
    if (shape_.size() != block_.size())
        throw std::invalid_argument("block rank does not match field rank");
    for (size_t d = 0; d < shape_.size(); ++d)
        if (shape_[d] == 0 || block_[d] == 0)
            throw std::invalid_argument("empty shape or block extent");
    done_ = shape_.empty();
}

bool RegionIter::next(Region& out) {
    if (done_) return false;
    out.origin = cursor_;
    out.extent.resize(shape_.size());
    for (size_t d = 0; d < shape_.size(); ++d)
        out.extent[d] = std::min(block_[d], shape_[d] - cursor_[d]);
    // Advance the tile cursor, last dimension fastest.
    for (size_t d = shape_.size(); d-- > 0;) {
        cursor_[d] += block_[d];
        if (cursor_[d] < shape_[d]) return true;
        cursor_[d] = 0;
    }
    done_ = true;
    return true;
}

size_t RegionIter::region_count() const {
    size_t n = 1;
    for (size_t d = 0; d < shape_.size(); ++d)
        n *= (shape_[d] + block_[d] - 1) / block_[d];
    return n;
}

void RegionIter::member_indices(const Region& r, std::vector<size_t>& out) const {
    std::vector<size_t> strides(shape_.size(), 1);
    for (size_t d = shape_.size() - 1; d-- > 0;)
        strides[d] = strides[d + 1] * shape_[d + 1];
    std::vector<size_t> c(shape_.size(), 0);
    for (;;) {
        size_t idx = 0;
        for (size_t d = 0; d < shape_.size(); ++d)
            idx += (r.origin[d] + c[d]) * strides[d];
        out.push_back(idx);
        size_t d = shape_.size();
        for (; d-- > 0;) {
            if (++c[d] < r.extent[d]) break;
            c[d] = 0;
        }
        if (d == static_cast<size_t>(-1)) return;
    }
}

std::vector<double> region_coefficients(const QoiSpec& spec, const Region& r) {
    size_t count = r.count();
    std::vector<double> alpha(count);
    switch (spec.coeff_rule) {
        case CoeffRule::Average:
            for (double& a : alpha) a = 1.0 / static_cast<double>(count);
            break;
        case CoeffRule::Sum:
            for (double& a : alpha) a = 1.0;
            break;
        case CoeffRule::Weighted: {
            // Weights are laid out over the full block; clipped regions pick
            // the weights of the points they actually contain.
            std::vector<size_t> bstride(spec.block.size(), 1);
            for (size_t d = spec.block.size() - 1; d-- > 0;)
                bstride[d] = bstride[d + 1] * spec.block[d + 1];
            std::vector<size_t> c(r.extent.size(), 0);
            for (size_t j = 0; j < count; ++j) {
                size_t w = 0;
                for (size_t d = 0; d < c.size(); ++d) w += c[d] * bstride[d];
                alpha[j] = spec.weights[w];
                for (size_t d = c.size(); d-- > 0;) {
                    if (++c[d] < r.extent[d]) break;
                    c[d] = 0;
                }
            }
            double total = 0.0;
            for (double a : alpha) total += a;
            if (total == 0.0)
                throw std::invalid_argument("weights sum to zero over a block");
            for (double& a : alpha) a /= total;
            break;
        }
    }
    return alpha;
}

// ---------------------------------------------------------------------------

namespace {

void require_fields(const QoiSpec& spec, std::span<const Field> fields) {
    if (fields.empty()) throw std::invalid_argument("no input fields");
    if (spec.kind == QoiKind::MultivariateGeneral) {
        if (fields.size() != spec.arity)
            throw std::invalid_argument("field count does not match arity");
        for (const Field& f : fields)
            if (f.shape != fields[0].shape)
                throw std::invalid_argument("bound fields differ in shape");
    } else if (fields.size() != 1) {
        throw std::invalid_argument("scalar quantity expects one field");
    }
}

struct FiniteCheck {
    bool allow_nonfinite;
    double operator()(double v, size_t index) const {
        if (!allow_nonfinite && !std::isfinite(v))
            throw DomainError("quantity evaluates non-finite at flat index " +
                                  std::to_string(index),
                              index);
        return v;
    }
};

}  // namespace

Field evaluate_qoi(const QoiSpec& spec, std::span<const Field> fields,
                   bool allow_nonfinite) {
    require_fields(spec, fields);
    const FiniteCheck checked{allow_nonfinite};
    const Field& first = fields[0];
    switch (spec.kind) {
        case QoiKind::Univariate: {
            Field out = make_field(first.shape, Dtype::F64);
            double at[1];
            for (size_t i = 0; i < first.values.size(); ++i) {
                at[0] = first.values[i];
                out.values[i] = checked(spec.bundle.cf(at), i);
            }
            return out;
        }
        case QoiKind::RegionalLinear: {
            RegionIter it(first.shape, spec.block);
            std::vector<size_t> out_shape(first.shape.size());
            for (size_t d = 0; d < first.shape.size(); ++d)
                out_shape[d] = (first.shape[d] + spec.block[d] - 1) / spec.block[d];
            Field out = make_field(out_shape, Dtype::F64);
            Region r;
            std::vector<size_t> members;
            size_t ri = 0;
            double at[1];
            while (it.next(r)) {
                members.clear();
                it.member_indices(r, members);
                std::vector<double> alpha = region_coefficients(spec, r);
                double acc = spec.constant;
                for (size_t j = 0; j < members.size(); ++j) {
                    at[0] = first.values[members[j]];
                    acc += alpha[j] * checked(spec.bundle.cf(at), members[j]);
                }
                out.values[ri++] = checked(acc, members.front());
            }
            return out;
        }
        case QoiKind::MultivariateGeneral: {
            Field out = make_field(first.shape, Dtype::F64);
            std::vector<double> at(spec.arity);
            for (size_t i = 0; i < first.values.size(); ++i) {
                for (size_t k = 0; k < spec.arity; ++k) at[k] = fields[k].values[i];
                out.values[i] = checked(spec.bundle.cf(at), i);
            }
            return out;
        }
    }
    throw std::logic_error("unreachable quantity kind");
}

QoiRange qoi_value_range(const QoiSpec& spec, std::span<const Field> fields) {
    Field q = evaluate_qoi(spec, fields);
    auto [lo, hi] = q.value_range();
    QoiRange r;
    r.lo = lo;
    r.hi = hi;
    r.degenerate = !(hi > lo);
    return r;
}

}  // namespace qpkt
