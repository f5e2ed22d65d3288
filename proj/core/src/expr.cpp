#include "qpkt/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace qpkt {

namespace {

bool is_const(const ExprPtr& e, double v) {
    return e->kind == NodeKind::Constant && e->value == v;
}

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

double apply_unary_op(NodeKind k, double x, double exponent = 0.0) {
    switch (k) {
        case NodeKind::PowConst: return std::pow(x, exponent);
        case NodeKind::Exp: return std::exp(x);
        case NodeKind::Ln: return std::log(x);
        case NodeKind::Log2: return std::log2(x);
        case NodeKind::Sqrt: return std::sqrt(x);
        case NodeKind::Tanh: return std::tanh(x);
        case NodeKind::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case NodeKind::Negate: return -x;
        default: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double apply_binary_op(NodeKind k, double a, double b) {
    switch (k) {
        case NodeKind::Add: return a + b;
        case NodeKind::Sub: return a - b;
        case NodeKind::Mul: return a * b;
        case NodeKind::Div: return a / b;
        default: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ExprPtr make_const(double v) { return node({.kind = NodeKind::Constant, .value = v}); }

ExprPtr make_var(int index, std::string name) {
    Expr e{.kind = NodeKind::Variable, .var = index};
    e.name = std::move(name);
    return node(std::move(e));
}

ExprPtr make_add(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant) {
        double v = a->value + b->value;
        if (std::isfinite(v)) return make_const(v);
    }
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return node({.kind = NodeKind::Add, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_sub(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant) {
        double v = a->value - b->value;
        if (std::isfinite(v)) return make_const(v);
    }
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return make_unary(NodeKind::Negate, std::move(b));
    return node({.kind = NodeKind::Sub, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_mul(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant) {
        double v = a->value * b->value;
        if (std::isfinite(v)) return make_const(v);
    }
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return node({.kind = NodeKind::Mul, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_div(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant &&
        b->value != 0.0) {
        double v = a->value / b->value;
        if (std::isfinite(v)) return make_const(v);
    }
    if (is_const(a, 0.0)) return make_const(0.0);
    if (is_const(b, 1.0)) return a;
    return node({.kind = NodeKind::Div, .a = std::move(a), .b = std::move(b)});
}

ExprPtr make_pow(ExprPtr base, double exponent) {
    if (exponent == 1.0) return base;
    if (exponent == 0.0) return make_const(1.0);
    if (base->kind == NodeKind::Constant) {
        double v = std::pow(base->value, exponent);
        if (std::isfinite(v)) return make_const(v);
    }
    return node({.kind = NodeKind::PowConst, .value = exponent, .a = std::move(base)});
}

ExprPtr make_unary(NodeKind kind, ExprPtr a) {
    if (kind == NodeKind::Negate) {
        if (a->kind == NodeKind::Constant) return make_const(-a->value);
        if (a->kind == NodeKind::Negate) return a->a;
    } else if (a->kind == NodeKind::Constant) {
        double v = apply_unary_op(kind, a->value);
        if (std::isfinite(v)) return make_const(v);
    }
    return node({.kind = kind, .a = std::move(a)});
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct FunctionName {
    const char* text;
    NodeKind kind;
};

constexpr FunctionName kFunctions[] = {
    {"exp", NodeKind::Exp},     {"ln", NodeKind::Ln},
    {"log", NodeKind::Ln},      {"log2", NodeKind::Log2},
    {"sqrt", NodeKind::Sqrt},   {"tanh", NodeKind::Tanh},
    {"sigmoid", NodeKind::Sigmoid},
};

class Parser {
  public:
    Parser(std::string_view text, std::span<const std::string> vars)
        : text_(text), vars_(vars) {}

    ExprPtr run() {
        ExprPtr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected character", pos_);
        return e;
    }

  private:
    std::string_view text_;
    size_t pos_ = 0;
    std::span<const std::string> vars_;

    [[noreturn]] void fail(const std::string& msg, size_t off) const {
        throw ParseError(msg + " at offset " + std::to_string(off), off);
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        for (;;) {
            char c = peek();
            if (c == '+') {
                ++pos_;
                e = make_add(std::move(e), parse_term());
            } else if (c == '-') {
                ++pos_;
                e = make_sub(std::move(e), parse_term());
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_power();
        for (;;) {
            char c = peek();
            if (c == '*') {
                ++pos_;
                e = make_mul(std::move(e), parse_power());
            } else if (c == '/') {
                ++pos_;
                e = make_div(std::move(e), parse_power());
            } else {
                return e;
            }
        }
    }

    // '^' is right-associative and binds looser than unary minus, so
    // "-x^2" is (-x)^2 and "x^-2" is legal.
    ExprPtr parse_power() {
        ExprPtr base = parse_unary();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^') {
            size_t op = pos_++;
            ExprPtr expo = parse_power();
            if (expo->kind == NodeKind::Constant)
                return make_pow(std::move(base), expo->value);
            if (base->kind == NodeKind::Constant) {
                // c^u with c > 0 lowers to exp(u*ln c); the base e itself
                // folds to exp(u) exactly.
                if (base->value > 0.0) {
                    double lc = base->value == std::exp(1.0)
                                    ? 1.0
                                    : std::log(base->value);
                    return make_unary(NodeKind::Exp,
                                      make_mul(make_const(lc), std::move(expo)));
                }
                fail("power with variable exponent needs a positive constant base", op);
            }
            fail("variable exponent in power", op);
        }
        return base;
    }

    ExprPtr parse_unary() {
        if (peek() == '-') {
            ++pos_;
            return make_unary(NodeKind::Negate, parse_unary());
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        char c = peek();
        size_t start = pos_;
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_sum();
            if (!eat(')')) fail("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            const char* first = text_.data() + pos_;
            const char* last = text_.data() + text_.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc()) fail("malformed number", start);
            pos_ += static_cast<size_t>(ptr - first);
            return make_const(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                    text_[end] == '_'))
                ++end;
            std::string_view name = text_.substr(pos_, end - pos_);
            pos_ = end;
            for (size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i] == name)
                    return make_var(static_cast<int>(i), std::string(name));
            for (const auto& fn : kFunctions) {
                if (name == fn.text) {
                    if (!eat('(')) fail("expected '(' after function name", pos_);
                    ExprPtr arg = parse_sum();
                    if (!eat(')')) fail("expected ')'", pos_);
                    return make_unary(fn.kind, std::move(arg));
                }
            }
            if (name == "e") return make_const(std::exp(1.0));
            if (name == "pi") return make_const(std::acos(-1.0));
            fail("unknown identifier '" + std::string(name) + "'", start);
        }
        fail(pos_ == text_.size() ? "unexpected end of input"
                                  : "unexpected character",
             pos_);
    }
};

}  // namespace

ExprPtr parse(std::string_view text, std::span<const std::string> variables) {
    return Parser(text, variables).run();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Grammar level a node parses at: sum 1, term 2, power 3, unary 4, primary 5.
int level(const Expr& e) {
    switch (e.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::PowConst: return 3;
        case NodeKind::Negate: return 4;
        default: return 5;
    }
}

void print_number(std::string& out, double v) {
    if (std::signbit(v)) {
        out += '-';
        v = -v;
    }
    std::array<char, 40> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), ptr);
}

void print_to(std::string& out, const Expr& e);

void print_child(std::string& out, const Expr& child, int min_level) {
    if (level(child) < min_level) {
        out += '(';
        print_to(out, child);
        out += ')';
    } else {
        print_to(out, child);
    }
}

void print_to(std::string& out, const Expr& e) {
    switch (e.kind) {
        case NodeKind::Constant: print_number(out, e.value); return;
        case NodeKind::Variable: out += e.name; return;
        case NodeKind::Add:
            print_child(out, *e.a, 1);
            out += '+';
            print_child(out, *e.b, 2);
            return;
        case NodeKind::Sub:
            print_child(out, *e.a, 1);
            out += '-';
            print_child(out, *e.b, 2);
            return;
        case NodeKind::Mul:
            print_child(out, *e.a, 2);
            out += '*';
            print_child(out, *e.b, 3);
            return;
        case NodeKind::Div:
            print_child(out, *e.a, 2);
            out += '/';
            print_child(out, *e.b, 3);
            return;
        case NodeKind::PowConst:
            print_child(out, *e.a, 4);
            out += '^';
            print_number(out, e.value);
            return;
        case NodeKind::Negate:
            out += '-';
            print_child(out, *e.a, 4);
            return;
        case NodeKind::Exp: out += "exp"; break;
        case NodeKind::Ln: out += "ln"; break;
        case NodeKind::Log2: out += "log2"; break;
        case NodeKind::Sqrt: out += "sqrt"; break;
        case NodeKind::Tanh: out += "tanh"; break;
        case NodeKind::Sigmoid: out += "sigmoid"; break;
    }
    out += '(';
    print_to(out, *e.a);
    out += ')';
}

}  // namespace

std::string print(const Expr& e) {
    std::string out;
    print_to(out, e);
    return out;
}

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.value != b.value || a.var != b.var) return false;
    if ((a.a == nullptr) != (b.a == nullptr)) return false;
    if ((a.b == nullptr) != (b.b == nullptr)) return false;
    if (a.a && !equal(*a.a, *b.a)) return false;
    if (a.b && !equal(*a.b, *b.b)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Differentiation

ExprPtr differentiate(const ExprPtr& e, int var) {
    switch (e->kind) {
        case NodeKind::Constant: return make_const(0.0);
        case NodeKind::Variable: return make_const(e->var == var ? 1.0 : 0.0);
        case NodeKind::Add:
            return make_add(differentiate(e->a, var), differentiate(e->b, var));
        case NodeKind::Sub:
            return make_sub(differentiate(e->a, var), differentiate(e->b, var));
        case NodeKind::Mul:
            return make_add(make_mul(differentiate(e->a, var), e->b),
                            make_mul(e->a, differentiate(e->b, var)));
        case NodeKind::Div:
            return make_div(make_sub(make_mul(differentiate(e->a, var), e->b),
                                     make_mul(e->a, differentiate(e->b, var))),
                            make_pow(e->b, 2.0));
        case NodeKind::PowConst:
            return make_mul(make_mul(make_const(e->value),
                                     make_pow(e->a, e->value - 1.0)),
                            differentiate(e->a, var));
        case NodeKind::Exp: return make_mul(e, differentiate(e->a, var));
        case NodeKind::Ln: return make_div(differentiate(e->a, var), e->a);
        case NodeKind::Log2:
            return make_div(differentiate(e->a, var),
                            make_mul(e->a, make_const(std::log(2.0))));
        case NodeKind::Sqrt:
            return make_div(differentiate(e->a, var),
                            make_mul(make_const(2.0), e));
        case NodeKind::Tanh:
            return make_mul(make_sub(make_const(1.0), make_pow(e, 2.0)),
                            differentiate(e->a, var));
        case NodeKind::Sigmoid:
            return make_mul(make_mul(e, make_sub(make_const(1.0), e)),
                            differentiate(e->a, var));
        case NodeKind::Negate:
            return make_unary(NodeKind::Negate, differentiate(e->a, var));
    }
    return make_const(0.0);
}

// ---------------------------------------------------------------------------
// Evaluation

double eval(const Expr& e, std::span<const double> vars) {
    switch (e.kind) {
        case NodeKind::Constant: return e.value;
        case NodeKind::Variable: return vars[static_cast<size_t>(e.var)];
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
            return apply_binary_op(e.kind, eval(*e.a, vars), eval(*e.b, vars));
        default:
            return apply_unary_op(e.kind, eval(*e.a, vars), e.value);
    }
}

CompiledExpr::CompiledExpr(const ExprPtr& e) {
    // Post-order flattening; evaluation order matches the recursive eval.
    struct Frame {
        const Expr* n;
        bool expanded;
    };
    std::vector<Frame> work{{e.get(), false}};
    while (!work.empty()) {
        Frame f = work.back();
        work.pop_back();
        if (f.expanded || (!f.n->a && !f.n->b)) {
            ops_.push_back({f.n->kind, f.n->value, f.n->var});
            continue;
        }
        work.push_back({f.n, true});
        if (f.n->b) work.push_back({f.n->b.get(), false});
        if (f.n->a) work.push_back({f.n->a.get(), false});
    }
    // The leaf ordering above emits children left-to-right.
    size_t depth = 0;
    for (const Op& op : ops_) {
        switch (op.kind) {
            case NodeKind::Constant:
            case NodeKind::Variable: ++depth; break;
            case NodeKind::Add:
            case NodeKind::Sub:
            case NodeKind::Mul:
            case NodeKind::Div: --depth; break;
            default: break;
        }
        stack_need_ = std::max(stack_need_, depth);
    }
    if (stack_need_ > 256)
        throw std::invalid_argument("expression too deeply nested to compile");
}

double CompiledExpr::operator()(std::span<const double> vars) const {
    std::array<double, 256> stack;
    size_t top = 0;
    for (const Op& op : ops_) {
        switch (op.kind) {
            case NodeKind::Constant: stack[top++] = op.value; break;
            case NodeKind::Variable:
                stack[top++] = vars[static_cast<size_t>(op.var)];
                break;
            case NodeKind::Add:
            case NodeKind::Sub:
            case NodeKind::Mul:
            case NodeKind::Div: {
                double b = stack[--top];
                double a = stack[--top];
                stack[top++] = apply_binary_op(op.kind, a, b);
                break;
            }
            default:
                stack[top - 1] = apply_unary_op(op.kind, stack[top - 1], op.value);
                break;
        }
    }
    return stack[0];
}

// ---------------------------------------------------------------------------
// Singularity analysis

namespace {

// p*x[var] + q; var == -1 encodes a plain constant.
struct Affine {
    int var = -1;
    double p = 0.0;
    double q = 0.0;
};

std::optional<Affine> try_affine(const Expr& e) {
    switch (e.kind) {
        case NodeKind::Constant: return Affine{-1, 0.0, e.value};
        case NodeKind::Variable: return Affine{e.var, 1.0, 0.0};
        case NodeKind::Add:
        case NodeKind::Sub: {
            auto a = try_affine(*e.a);
            auto b = try_affine(*e.b);
            if (!a || !b) return std::nullopt;
            if (a->var != -1 && b->var != -1 && a->var != b->var)
                return std::nullopt;
            double sign = e.kind == NodeKind::Sub ? -1.0 : 1.0;
            Affine r;
            r.var = a->var != -1 ? a->var : b->var;
            r.p = a->p + sign * b->p;
            r.q = a->q + sign * b->q;
            return r;
        }
        case NodeKind::Mul: {
            auto a = try_affine(*e.a);
            auto b = try_affine(*e.b);
            if (!a || !b) return std::nullopt;
            if (a->var != -1 && b->var != -1) return std::nullopt;
            const Affine& lin = a->var != -1 ? *a : *b;
            double c = a->var != -1 ? b->q : a->q;
            return Affine{lin.var, lin.p * c, lin.q * c};
        }
        case NodeKind::Div: {
            auto a = try_affine(*e.a);
            auto b = try_affine(*e.b);
            if (!a || !b || b->var != -1 || b->q == 0.0) return std::nullopt;
            return Affine{a->var, a->p / b->q, a->q / b->q};
        }
        case NodeKind::Negate: {
            auto a = try_affine(*e.a);
            if (!a) return std::nullopt;
            return Affine{a->var, -a->p, -a->q};
        }
        default: return std::nullopt;
    }
}

void add_sing(std::vector<Singularity>& out, int var, SingularKind kind,
              double value) {
    for (const Singularity& s : out)
        if (s.var == var && s.kind == kind && s.value == value) return;
    out.push_back({var, kind, value});
}

// Records the constraint "arg <= 0 is out of bounds" when arg is affine in
// one variable.
void add_half_line(std::vector<Singularity>& out, const Expr& arg) {
    auto aff = try_affine(arg);
    if (!aff || aff->var == -1 || aff->p == 0.0) return;
    double root = -aff->q / aff->p;
    add_sing(out, aff->var,
             aff->p > 0.0 ? SingularKind::AtOrBelow : SingularKind::AtOrAbove,
             root);
}

void collect(const Expr& e, std::vector<Singularity>& out) {
    if (e.a) collect(*e.a, out);
    if (e.b) collect(*e.b, out);
    switch (e.kind) {
        case NodeKind::Div: {
            auto aff = try_affine(*e.b);
            if (aff && aff->var != -1 && aff->p != 0.0)
                add_sing(out, aff->var, SingularKind::Point, -aff->q / aff->p);
            break;
        }
        case NodeKind::Ln:
        case NodeKind::Log2:
        case NodeKind::Sqrt:
            add_half_line(out, *e.a);
            break;
        case NodeKind::PowConst: {
            double p = e.value;
            bool integral = p == std::floor(p);
            if (integral && p < 0.0) {
                auto aff = try_affine(*e.a);
                if (aff && aff->var != -1 && aff->p != 0.0)
                    add_sing(out, aff->var, SingularKind::Point,
                             -aff->q / aff->p);
            } else if (!integral) {
                add_half_line(out, *e.a);
            }
            break;
        }
        default: break;
    }
}

}  // namespace

std::vector<Singularity> singularities(const ExprPtr& e) {
    std::vector<Singularity> out;
    collect(*e, out);
    return out;
}

double singular_distance(std::span<const Singularity> sings, int var, double x) {
    double d = std::numeric_limits<double>::infinity();
    for (const Singularity& s : sings) {
        if (s.var != var) continue;
        switch (s.kind) {
            case SingularKind::Point: d = std::min(d, std::fabs(x - s.value)); break;
            case SingularKind::AtOrBelow:
                d = std::min(d, std::max(x - s.value, 0.0));
                break;
            case SingularKind::AtOrAbove:
                d = std::min(d, std::max(s.value - x, 0.0));
                break;
        }
    }
    return d;
}

// ---------------------------------------------------------------------------

DerivativeBundle analyze(const ExprPtr& e, std::span<const std::string> vars) {
    DerivativeBundle b;
    b.f = e;
    b.cf = CompiledExpr(e);
    b.vars.assign(vars.begin(), vars.end());
    b.sings = singularities(e);
    for (size_t v = 0; v < vars.size(); ++v) {
        ExprPtr d1 = differentiate(e, static_cast<int>(v));
        ExprPtr d2 = differentiate(d1, static_cast<int>(v));
        for (const Singularity& s : singularities(d1))
            add_sing(b.sings, s.var, s.kind, s.value);
        for (const Singularity& s : singularities(d2))
            add_sing(b.sings, s.var, s.kind, s.value);
        b.cd1.emplace_back(d1);
        b.cd2.emplace_back(d2);
        b.d1.push_back(std::move(d1));
        b.d2.push_back(std::move(d2));
    }
    return b;
}

DerivativeBundle analyze(std::string_view text,
                         std::span<const std::string> vars) {
    return analyze(parse(text, vars), vars);
}

}  // namespace qpkt
