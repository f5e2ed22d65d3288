#ifndef QPKT_EXPR_HPP
#define QPKT_EXPR_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpkt {

// Symbolic scalar expressions over named variables.  Trees are immutable and
// shared; factory helpers fold literal subtrees (and identity elements) so
// derivatives come out in readable form.
enum class NodeKind : uint8_t {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    PowConst,  // base^exponent with a literal exponent
    Exp,
    Ln,
    Log2,
    Sqrt,
    Tanh,
    Sigmoid,
    Negate,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    NodeKind kind;
    double value = 0.0;      // Constant payload, or PowConst exponent
    int var = -1;            // Variable index into the declared-name list
    std::string name;        // Variable name (kept for printing)
    ExprPtr a, b;            // children (b only for binary kinds)
};

struct ParseError : std::runtime_error {
    size_t offset;  // byte offset into the input string
    ParseError(const std::string& msg, size_t off)
        : std::runtime_error(msg), offset(off) {}
};

// Factories; all fold constant subtrees, plus the usual identities
// (u+0, u*1, u*0, u^1, ...).  Folds that would produce a non-finite
// constant are left symbolic so singularities stay visible.
ExprPtr make_const(double v);
ExprPtr make_var(int index, std::string name);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_pow(ExprPtr base, double exponent);
ExprPtr make_unary(NodeKind kind, ExprPtr a);  // Exp..Sigmoid, Negate

// Parses infix notation with precedence  unary-  >  ^  >  * /  >  + -
// (so "-x^2" reads as (-x)^2) and right-associative ^.  Known functions:
// exp, ln, log (alias of ln), log2, sqrt, tanh, sigmoid.  Named constants
// e and pi.  "c^expr" with a positive literal base lowers to exp(expr*ln c);
// a variable base with a variable exponent is rejected.
// Throws ParseError with the byte offset of the problem.
ExprPtr parse(std::string_view text, std::span<const std::string> variables);

// Canonical text form; parse(print(e), vars) reproduces e node for node.
std::string print(const Expr& e);

bool equal(const Expr& a, const Expr& b);

// Derivative with respect to one variable; no simplification beyond the
// factory folds.
ExprPtr differentiate(const ExprPtr& e, int var);

// Tree-walking evaluation.  Out-of-domain inputs follow IEEE semantics and
// surface as NaN/inf in the result; callers decide how to react.
double eval(const Expr& e, std::span<const double> vars);

// Post-order compilation to a small stack program; evaluation order (and so
// every rounding step) matches eval() exactly.
class CompiledExpr {
  public:
    CompiledExpr() = default;
    explicit CompiledExpr(const ExprPtr& e);
    double operator()(std::span<const double> vars) const;
    bool valid() const { return !ops_.empty(); }

  private:
    struct Op {
        NodeKind kind;
        double value;
        int var;
    };
    std::vector<Op> ops_;
    size_t stack_need_ = 0;
};

// Where an expression (or its derivatives) leaves its domain, reduced to
// per-variable constraints.  Point entries come from affine denominators
// and negative-integer powers; half-lines from log/sqrt arguments and
// fractional powers.  Non-affine offending subtrees are not representable
// here and are instead caught at evaluation time.
enum class SingularKind : uint8_t {
    Point,         // x == value
    AtOrBelow,     // x <= value
    AtOrAbove,     // x >= value
};

struct Singularity {
    int var;
    SingularKind kind;
    double value;
};

std::vector<Singularity> singularities(const ExprPtr& e);

// Distance from x to the nearest singular set of variable `var`
// (+inf when none applies).
double singular_distance(std::span<const Singularity> sings, int var, double x);

// An expression with the derivatives the bound estimator needs, in both
// symbolic and compiled form.
struct DerivativeBundle {
    ExprPtr f;
    std::vector<ExprPtr> d1;   // one per variable
    std::vector<ExprPtr> d2;   // one per variable (d/dv of d1[v])
    CompiledExpr cf;
    std::vector<CompiledExpr> cd1, cd2;
    std::vector<Singularity> sings;
    std::vector<std::string> vars;
};

DerivativeBundle analyze(const ExprPtr& e, std::span<const std::string> vars);
DerivativeBundle analyze(std::string_view text, std::span<const std::string> vars);

}  // namespace qpkt

#endif
