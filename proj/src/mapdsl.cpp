#include "elab/mapdsl.hpp"

#include <algorithm>
#include <cstddef>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "elab/modp.hpp"
#include "elab/rng.hpp"
#include "elab/unipoly.hpp"

namespace elab::dsl {

// ---------------------------------------------------------------------------
// BiPoly

int BiPoly::deg_x() const {
    int d = 0;
    for (const auto& [key, c] : terms) d = std::max(d, key.first);
    return d;
}

int BiPoly::deg_y() const {
    int d = 0;
    for (const auto& [key, c] : terms) d = std::max(d, key.second);
    return d;
}

mpq_class BiPoly::eval(const mpq_class& x, const mpq_class& y) const {
    std::vector<mpq_class> xp{1}, yp{1};
    for (int i = 0; i < deg_x(); ++i) xp.push_back(xp.back() * x);
    for (int j = 0; j < deg_y(); ++j) yp.push_back(yp.back() * y);
    mpq_class acc = 0;
    for (const auto& [key, c] : terms)
        acc += mpq_class(c) * xp[static_cast<std::size_t>(key.first)] *
               yp[static_cast<std::size_t>(key.second)];
    return acc;
}

namespace {

constexpr std::size_t kMaxTerms = 200000;

BiPoly bp_const(const mpz_class& c) {
    BiPoly r;
    if (c != 0) r.terms[{0, 0}] = c;
    return r;
}

BiPoly bp_var(bool cur) {
    BiPoly r;
    r.terms[{cur ? 1 : 0, cur ? 0 : 1}] = 1;
    return r;
}

BiPoly bp_add(const BiPoly& f, const BiPoly& g) {
    BiPoly r = f;
    for (const auto& [key, c] : g.terms) {
        auto it = r.terms.find(key);
        if (it == r.terms.end()) {
            r.terms.emplace(key, c);
        } else {
            it->second += c;
            if (it->second == 0) r.terms.erase(it);
        }
    }
    return r;
}

BiPoly bp_neg(const BiPoly& f) {
    BiPoly r;
    for (const auto& [key, c] : f.terms) r.terms[key] = -c;
    return r;
}

BiPoly bp_mul(const BiPoly& f, const BiPoly& g) {
    BiPoly r;
    for (const auto& [kf, cf] : f.terms)
        for (const auto& [kg, cg] : g.terms) {
            auto key = std::make_pair(kf.first + kg.first, kf.second + kg.second);
            auto it = r.terms.find(key);
            if (it == r.terms.end()) {
                mpz_class prod = cf * cg;
                if (prod != 0) r.terms.emplace(key, std::move(prod));
            } else {
                it->second += cf * cg;
                if (it->second == 0) r.terms.erase(it);
            }
        }
    if (r.terms.size() > kMaxTerms)
        throw SemanticError("normalized polynomial exceeds the term budget");
    return r;
}

BiPoly bp_pow(const BiPoly& f, long e) {
    BiPoly acc = bp_const(1);
    BiPoly base = f;
    while (e > 0) {
        if (e & 1) acc = bp_mul(acc, base);
        e >>= 1;
        if (e) base = bp_mul(base, base);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { integer, x_cur, x_prev, x_next, plus, minus, star, slash, caret, lparen, rparen, equals, end };

struct Token {
    Tok kind;
    mpz_class value;
    std::size_t pos;
};

std::string line_col(const std::string& src, std::size_t pos) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos && i < src.size(); ++i) {
        if (src[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string tok_name(const Token& t) {
    switch (t.kind) {
        case Tok::integer: return "integer " + t.value.get_str();
        case Tok::x_cur: return "x[n]";
        case Tok::x_prev: return "x[n-1]";
        case Tok::x_next: return "x[n+1]";
        case Tok::plus: return "'+'";
        case Tok::minus: return "'-'";
        case Tok::star: return "'*'";
        case Tok::slash: return "'/'";
        case Tok::caret: return "'^'";
        case Tok::lparen: return "'('";
        case Tok::rparen: return "')'";
        case Tok::equals: return "'='";
        case Tok::end: return "end of input";
    }
    return "?";
}

// True when src[i..] starts with U+2212 (minus sign); treated as '-'.
bool is_unicode_minus(const std::string& s, std::size_t i) {
    return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
           static_cast<unsigned char>(s[i + 1]) == 0x88 &&
           static_cast<unsigned char>(s[i + 2]) == 0x92;
}

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto minus_at = [&](std::size_t j, std::size_t& width) {
        if (j < s.size() && s[j] == '-') {
            width = 1;
            return true;
        }
        if (is_unicode_minus(s, j)) {
            width = 3;
            return true;
        }
        return false;
    };
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++i;
            continue;
        }
        std::size_t start = i;
        std::size_t w = 0;
        if (minus_at(i, w)) {
            out.push_back({Tok::minus, 0, start});
            i += w;
            continue;
        }
        switch (c) {
            case '+': out.push_back({Tok::plus, 0, start}); ++i; continue;
            case '*': out.push_back({Tok::star, 0, start}); ++i; continue;
            case '/': out.push_back({Tok::slash, 0, start}); ++i; continue;
            case '^': out.push_back({Tok::caret, 0, start}); ++i; continue;
            case '(': out.push_back({Tok::lparen, 0, start}); ++i; continue;
            case ')': out.push_back({Tok::rparen, 0, start}); ++i; continue;
            case '=': out.push_back({Tok::equals, 0, start}); ++i; continue;
            default: break;
        }
        if (c >= '0' && c <= '9') {
            std::size_t j = i;
            while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
            out.push_back({Tok::integer, mpz_class(s.substr(i, j - i)), start});
            i = j;
            continue;
        }
        if (c == 'x') {
            if (i + 1 >= s.size() || s[i + 1] != '[')
                throw ParseError(start, "'[' after 'x'", "'" + s.substr(i, 1) + "' (" + line_col(s, start) + ")");
            if (i + 2 >= s.size() || s[i + 2] != 'n')
                throw ParseError(start, "'n' inside 'x[...]'", "malformed iterate (" + line_col(s, start) + ")");
            std::size_t j = i + 3;
            long offset = 0;
            if (j < s.size() && s[j] == ']') {
                out.push_back({Tok::x_cur, 0, start});
                i = j + 1;
                continue;
            }
            int sign = 0;
            if (j < s.size() && s[j] == '+') {
                sign = 1;
                ++j;
            } else if (minus_at(j, w)) {
                sign = -1;
                j += w;
            } else {
                throw ParseError(start, "']', '+', or '-' in the iterate index",
                                 "malformed iterate (" + line_col(s, start) + ")");
            }
            std::size_t dig = j;
            while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
            if (dig == j || j >= s.size() || s[j] != ']')
                throw ParseError(start, "an integer offset and ']' in the iterate index",
                                 "malformed iterate (" + line_col(s, start) + ")");
            offset = sign * std::stol(s.substr(dig, j - dig));
            i = j + 1;
            if (offset == 1) {
                out.push_back({Tok::x_next, 0, start});
            } else if (offset == -1) {
                out.push_back({Tok::x_prev, 0, start});
            } else {
                throw SemanticError("unsupported order: only x[n], x[n-1], and the left-hand x[n+1] are allowed (x[n" +
                                    std::string(offset >= 0 ? "+" : "") + std::to_string(offset) + "] at " +
                                    line_col(s, start) + ")");
            }
            continue;
        }
        throw ParseError(start, "a constant, iterate, operator, or parenthesis",
                         "'" + s.substr(i, 1) + "' (" + line_col(s, start) + ")");
    }
    out.push_back({Tok::end, 0, s.size()});
    return out;
}

// ---------------------------------------------------------------------------
// Parser: precedence levels add/sub < mul/div < unary minus < '^'.

using NodePtr = std::shared_ptr<const Node>;

class Parser {
public:
    Parser(const std::string& src, std::vector<Token> toks, const ParseLimits& lim)
        : src_(src), toks_(std::move(toks)), lim_(lim) {}

    NodePtr run() {
        expect(Tok::x_next, "x[n+1] on the left-hand side");
        expect(Tok::equals, "'='");
        NodePtr root = expr();
        if (peek().kind != Tok::end) fail(peek(), "end of input or an operator");
        return root;
    }

    std::size_t nodes() const { return nodes_; }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& advance() { return toks_[i_++]; }

    void expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) fail(peek(), what);
        advance();
    }

    [[noreturn]] void fail(const Token& t, const std::string& expected) const {
        throw ParseError(t.pos, expected, tok_name(t) + " (" + line_col(src_, t.pos) + ")");
    }

    NodePtr mk(Node n) {
        if (++nodes_ > lim_.max_nodes) throw SemanticError("expression exceeds the node budget");
        return std::make_shared<const Node>(std::move(n));
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            bool plus = advance().kind == Tok::plus;
            NodePtr rhs = term();
            Node n;
            n.kind = plus ? NodeKind::add : NodeKind::sub;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = mk(std::move(n));
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (peek().kind == Tok::star || peek().kind == Tok::slash) {
            bool star = advance().kind == Tok::star;
            NodePtr rhs = unary();
            Node n;
            n.kind = star ? NodeKind::mul : NodeKind::div;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = mk(std::move(n));
        }
        return lhs;
    }

    NodePtr unary() {
        bool negate = false;
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            if (advance().kind == Tok::minus) negate = !negate;
        }
        NodePtr base = power();
        if (!negate) return base;
        Node n;
        n.kind = NodeKind::neg;
        n.lhs = base;
        return mk(std::move(n));
    }

    NodePtr power() {
        NodePtr base = atom();
        if (peek().kind != Tok::caret) return base;
        advance();
        long e = exponent();
        Node n;
        n.kind = NodeKind::pow;
        n.lhs = base;
        n.exponent = e;
        return mk(std::move(n));
    }

    // exponent := ['-'] integer ['^' exponent]; towers fold right to left
    long exponent() {
        bool neg = false;
        if (peek().kind == Tok::minus) {
            neg = true;
            advance();
        }
        if (peek().kind != Tok::integer) fail(peek(), "an integer exponent");
        const Token& t = advance();
        if (t.value > lim_.max_exponent)
            throw SemanticError("exponent " + t.value.get_str() + " exceeds the limit " +
                                std::to_string(lim_.max_exponent));
        long v = t.value.get_si();
        if (peek().kind == Tok::caret) {
            advance();
            long up = exponent();
            if (up < 0) throw SemanticError("negative exponent inside an exponent tower");
            long acc = 1;
            for (long r = 0; r < up; ++r) {
                acc *= v;
                if (acc > lim_.max_exponent || acc < -lim_.max_exponent)
                    throw SemanticError("exponent tower exceeds the limit " +
                                        std::to_string(lim_.max_exponent));
            }
            v = acc;
        }
        return neg ? -v : v;
    }

    NodePtr atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::integer: {
                advance();
                Node n;
                n.kind = NodeKind::constant;
                n.value = mpq_class(t.value);
                return mk(std::move(n));
            }
            case Tok::x_cur: {
                advance();
                Node n;
                n.kind = NodeKind::x_cur;
                return mk(std::move(n));
            }
            case Tok::x_prev: {
                advance();
                Node n;
                n.kind = NodeKind::x_prev;
                return mk(std::move(n));
            }
            case Tok::x_next:
                throw SemanticError("x[n+1] may only appear as the left-hand side (" +
                                    line_col(src_, t.pos) + ")");
            case Tok::lparen: {
                advance();
                if (++depth_ > 256) throw SemanticError("expression nested too deeply");
                NodePtr inner = expr();
                expect(Tok::rparen, "')'");
                --depth_;
                return inner;
            }
            default:
                fail(t, "a constant, x[n], x[n-1], or '('");
        }
    }

    const std::string& src_;
    std::vector<Token> toks_;
    const ParseLimits& lim_;
    std::size_t i_ = 0;
    std::size_t nodes_ = 0;
    int depth_ = 0;
};

// ---------------------------------------------------------------------------
// Fraction normalization

std::pair<BiPoly, BiPoly> to_frac(const NodePtr& node) {
    switch (node->kind) {
        case NodeKind::constant:
            return {bp_const(node->value.get_num()), bp_const(node->value.get_den())};
        case NodeKind::x_cur:
            return {bp_var(true), bp_const(1)};
        case NodeKind::x_prev:
            return {bp_var(false), bp_const(1)};
        case NodeKind::add:
        case NodeKind::sub: {
            auto [n1, d1] = to_frac(node->lhs);
            auto [n2, d2] = to_frac(node->rhs);
            BiPoly cross = bp_mul(n2, d1);
            if (node->kind == NodeKind::sub) cross = bp_neg(cross);
            return {bp_add(bp_mul(n1, d2), cross), bp_mul(d1, d2)};
        }
        case NodeKind::mul: {
            auto [n1, d1] = to_frac(node->lhs);
            auto [n2, d2] = to_frac(node->rhs);
            return {bp_mul(n1, n2), bp_mul(d1, d2)};
        }
        case NodeKind::div: {
            auto [n1, d1] = to_frac(node->lhs);
            auto [n2, d2] = to_frac(node->rhs);
            if (n2.is_zero())
                throw SemanticError("division by an expression that is identically zero");
            return {bp_mul(n1, d2), bp_mul(d1, n2)};
        }
        case NodeKind::neg: {
            auto [n1, d1] = to_frac(node->lhs);
            return {bp_neg(n1), d1};
        }
        case NodeKind::pow: {
            auto [n1, d1] = to_frac(node->lhs);
            long e = node->exponent;
            if (e == 0) return {bp_const(1), bp_const(1)};
            if (e > 0) return {bp_pow(n1, e), bp_pow(d1, e)};
            if (n1.is_zero())
                throw SemanticError("negative power of an expression that is identically zero");
            return {bp_pow(d1, -e), bp_pow(n1, -e)};
        }
    }
    throw SemanticError("corrupt syntax tree");
}

void normalize_pair(BiPoly& num, BiPoly& den) {
    mpz_class g = 0;
    for (const auto& [key, c] : num.terms) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    for (const auto& [key, c] : den.terms) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g > 1) {
        for (auto& [key, c] : num.terms) c /= g;
        for (auto& [key, c] : den.terms) c /= g;
    }
    if (!den.terms.empty() && den.terms.rbegin()->second < 0) {
        num = bp_neg(num);
        den = bp_neg(den);
    }
}

bool uses_kind(const NodePtr& node, NodeKind kind) {
    if (!node) return false;
    if (node->kind == kind) return true;
    return uses_kind(node->lhs, kind) || uses_kind(node->rhs, kind);
}

}  // namespace

MapDef parse_map(const std::string& text, const ParseLimits& limits) {
    Parser parser(text, lex(text), limits);
    MapDef def;
    def.ast = parser.run();
    def.node_count = parser.nodes();
    auto [num, den] = to_frac(def.ast);
    if (den.is_zero()) throw SemanticError("denominator is identically zero");
    normalize_pair(num, den);
    def.num = std::move(num);
    def.den = std::move(den);
    if (!uses_kind(def.ast, NodeKind::x_prev))
        def.warnings.push_back("map does not reference x[n-1]; it degenerates to an order-1 recurrence");
    return def;
}

// ---------------------------------------------------------------------------
// Pretty printer.  Numeric precedence mirrors the parser; a child is wrapped
// in parentheses when its level is below what its slot requires.

namespace {

constexpr int kPrecAdd = 1, kPrecMul = 2, kPrecNeg = 3, kPrecPow = 4, kPrecAtom = 5;

struct Rendered {
    std::string text;
    int prec;
};

std::string wrap(const Rendered& r, int min_prec) {
    if (r.prec >= min_prec) return r.text;
    return "(" + r.text + ")";
}

Rendered render(const NodePtr& node) {
    switch (node->kind) {
        case NodeKind::constant: {
            const mpq_class& q = node->value;
            if (q < 0) {
                mpq_class a = -q;
                std::string body =
                    a.get_den() == 1 ? a.get_num().get_str() : a.get_num().get_str() + "/" + a.get_den().get_str();
                return {"-" + body, kPrecNeg};
            }
            if (q.get_den() == 1) return {q.get_num().get_str(), kPrecAtom};
            return {q.get_num().get_str() + "/" + q.get_den().get_str(), kPrecMul};
        }
        case NodeKind::x_cur: return {"x[n]", kPrecAtom};
        case NodeKind::x_prev: return {"x[n-1]", kPrecAtom};
        case NodeKind::add:
            return {wrap(render(node->lhs), kPrecAdd) + " + " + wrap(render(node->rhs), kPrecMul), kPrecAdd};
        case NodeKind::sub:
            return {wrap(render(node->lhs), kPrecAdd) + " - " + wrap(render(node->rhs), kPrecMul), kPrecAdd};
        case NodeKind::mul:
            return {wrap(render(node->lhs), kPrecMul) + "*" + wrap(render(node->rhs), kPrecNeg), kPrecMul};
        case NodeKind::div:
            return {wrap(render(node->lhs), kPrecMul) + "/" + wrap(render(node->rhs), kPrecNeg), kPrecMul};
        case NodeKind::neg:
            return {"-" + wrap(render(node->lhs), kPrecNeg), kPrecNeg};
        case NodeKind::pow:
            return {wrap(render(node->lhs), kPrecAtom) + "^" + std::to_string(node->exponent), kPrecPow};
    }
    return {"?", kPrecAtom};
}

}  // namespace

std::string pretty_print(const MapDef& map) { return "x[n+1] = " + render(map.ast).text; }

MapDef family_map(int k) {
    if (k < 1) throw RingError("family exponent k must be >= 1");
    return parse_map("x[n+1] = -x[n-1] + x[n] + 1/x[n]^" + std::to_string(k));
}

const char* grammar_ebnf() {
    return "map      = \"x[n+1]\" , \"=\" , expr ;\n"
           "expr     = term , { ( \"+\" | \"-\" ) , term } ;\n"
           "term     = unary , { ( \"*\" | \"/\" ) , unary } ;\n"
           "unary    = { \"-\" | \"+\" } , power ;\n"
           "power    = atom , [ \"^\" , exponent ] ;\n"
           "exponent = [ \"-\" ] , integer , [ \"^\" , exponent ] ;  (* right-associative *)\n"
           "atom     = integer | \"x[n]\" | \"x[n-1]\" | \"(\" , expr , \")\" ;\n"
           "integer  = digit , { digit } ;\n"
           "(* whitespace is insignificant between tokens; U+2212 is accepted as \"-\";\n"
           "   rational constants are written as integer quotients, e.g. 3/4 *)";
}

// ---------------------------------------------------------------------------
// Exact orbit

std::vector<mpq_class> eval_exact(const MapDef& map, const mpq_class& x_prev, const mpq_class& x0,
                                  int n_steps) {
    std::vector<mpq_class> orbit;
    orbit.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
    mpq_class prev = x_prev, cur = x0;
    for (int m = 1; m <= n_steps; ++m) {
        mpq_class den = map.den.eval(cur, prev);
        if (den == 0) throw SingularOrbit(m);
        mpq_class next = map.num.eval(cur, prev) / den;
        next.canonicalize();
        orbit.push_back(next);
        prev = cur;
        cur = next;
    }
    return orbit;
}

// ---------------------------------------------------------------------------
// Laurent-series step

sc::LaurentSeries series_step(const MapDef& map, const sc::LaurentSeries& x_prev,
                              const sc::LaurentSeries& x_cur) {
    int ord = x_cur.order() + x_prev.order() + 16;
    auto substitute = [&](const BiPoly& poly) {
        sc::LaurentSeries acc = sc::LaurentSeries::zero();
        std::vector<sc::LaurentSeries> xp{sc::LaurentSeries::constant(1, ord)};
        std::vector<sc::LaurentSeries> yp{sc::LaurentSeries::constant(1, ord)};
        for (int i = 0; i < poly.deg_x(); ++i) xp.push_back(mul(xp.back(), x_cur));
        for (int j = 0; j < poly.deg_y(); ++j) yp.push_back(mul(yp.back(), x_prev));
        for (const auto& [key, c] : poly.terms) {
            sc::LaurentSeries term = mul(xp[static_cast<std::size_t>(key.first)],
                                         yp[static_cast<std::size_t>(key.second)]);
            acc = add(acc, mul(sc::LaurentSeries::constant(mpq_class(c), ord), term));
        }
        return acc;
    };
    return mul(substitute(map.num), inv(substitute(map.den)));
}

// ---------------------------------------------------------------------------
// Mod-p degree profiler.
//
// The state after n steps is x_n = s * prod_i A_i^{e_i} over F_p(t), where the
// A_i are the monic "atoms" discovered so far (for the built-in family these
// are exactly the factor-chain entries specialized to the line).  One step
// substitutes the two previous states into the map's numerator and
// denominator over a common power of the stored denominators; the new
// denominator is then a product of known atom powers whenever the map's
// denominator is a monomial, and the new numerator is factored over the atom
// basis by repeated exact division, any non-constant leftover becoming a new
// atom.  Exponent arithmetic keeps the fraction reduced without any large gcd.

namespace {

struct DegenerateRun : std::exception {};

struct Atom {
    UPoly poly;  // monic, degree >= 1
    int birth;
};

struct PState {
    std::vector<long> exps;  // exponent per atom index; missing entries are 0
    uint64_t scalar = 1;     // 0 encodes the exact zero state
    UPoly num_dense{1};      // scalar included
    UPoly den_dense{1};      // monic
};

constexpr int kGcdBudget = 4000;

long exp_at(const std::vector<long>& v, std::size_t i) { return i < v.size() ? v[i] : 0; }

class ProfileRun {
public:
    ProfileRun(const MapDef& map, uint64_t p) : map_(map), p_(p) {
        dx_ = std::max(map.num.deg_x(), map.den.deg_x());
        dy_ = std::max(map.num.deg_y(), map.den.deg_y());
        den_monomial_ = map.den.terms.size() == 1;
    }

    std::vector<long> run(int n_max, uint64_t b0, uint64_t b1, uint64_t a0, uint64_t a1) {
        PState prev = line_state(b0, b1);
        PState cur = line_state(a0, a1);
        std::vector<long> degrees{num_degree(cur)};
        for (int n = 1; n <= n_max; ++n) {
            PState next = step(prev, cur, /*need_dense=*/n < n_max);
            degrees.push_back(num_degree(next));
            prev = std::move(cur);
            cur = std::move(next);
        }
        return degrees;
    }

private:
    PState line_state(uint64_t c0, uint64_t c1) {
        // c0 + c1 t = c1 * (t + c0/c1), c1 != 0
        UPoly monic{mulmod(c0, invmod(c1, p_), p_), 1};
        std::size_t idx = add_atom(monic);
        PState s;
        s.exps.assign(idx + 1, 0);
        s.exps[idx] = 1;
        s.scalar = c1;
        s.num_dense = upoly::scale(monic, c1, p_);
        s.den_dense = UPoly{1};
        return s;
    }

    std::size_t add_atom(const UPoly& monic) {
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i].poly == monic) return i;
        atoms_.push_back({monic, static_cast<int>(atoms_.size())});
        return atoms_.size() - 1;
    }

    long num_degree(const PState& s) const {
        if (s.scalar == 0) return 0;
        long d = 0;
        for (std::size_t i = 0; i < s.exps.size(); ++i)
            if (s.exps[i] > 0) d += s.exps[i] * upoly::deg(atoms_[i].poly);
        return d;
    }

    UPoly upow(const UPoly& f, long e) const {
        UPoly acc{1};
        UPoly base = f;
        while (e > 0) {
            if (e & 1) acc = upoly::mul(acc, base, p_);
            e >>= 1;
            if (e) base = upoly::mul(base, base, p_);
        }
        return acc;
    }

    // Divides the full multiplicity of `atom` out of `work`.  Binary lifting
    // keeps the division count at O(log m): ascend through atom^(2^j) while
    // each square still divides, then sweep the same powers downward for the
    // leftover bits.  Once the ascent stops at level J the remaining
    // multiplicity is below 2^J, so each lower power divides at most once.
    long extract_multiplicity(UPoly& work, const UPoly& atom) const {
        const int da = upoly::deg(atom);
        if (da < 1 || da > upoly::deg(work)) return 0;
        {
            auto [q, r] = upoly::divrem(work, atom, p_);
            if (!upoly::is_zero(r)) return 0;
            work = std::move(q);
        }
        long mult = 1;
        std::vector<UPoly> pows{atom};  // pows[j] = atom^(2^j)
        while (2 * upoly::deg(pows.back()) <= upoly::deg(work)) {
            UPoly sq = upoly::mul(pows.back(), pows.back(), p_);
            auto [q, r] = upoly::divrem(work, sq, p_);
            if (!upoly::is_zero(r)) break;
            work = std::move(q);
            mult += 1L << pows.size();
            pows.push_back(std::move(sq));
        }
        for (std::size_t j = pows.size(); j-- > 0;) {
            if (upoly::deg(pows[j]) > upoly::deg(work)) continue;
            auto [q, r] = upoly::divrem(work, pows[j], p_);
            if (upoly::is_zero(r)) {
                work = std::move(q);
                mult += 1L << j;
            }
        }
        return mult;
    }

    // Substitute the two states into `poly` over the common denominator
    // D1^dx * D2^dy.  Horner in X jumps over absent rows with one power of
    // N1 per gap; both tables carry only the exponents the map uses.
    UPoly substituted(const BiPoly& poly, const PState& cur, const std::map<int, UPoly>& d1_pow,
                      const std::map<int, UPoly>& t_row) {
        std::map<int, UPoly> rows;
        for (const auto& [key, c] : poly.terms) {
            uint64_t cm = mpz_fdiv_ui(c.get_mpz_t(), p_);
            if (cm == 0) continue;
            UPoly piece = upoly::scale(t_row.at(key.second), cm, p_);
            auto it = rows.find(key.first);
            if (it == rows.end())
                rows.emplace(key.first, std::move(piece));
            else
                it->second = upoly::add(it->second, piece, p_);
        }
        UPoly acc;  // zero
        int prev_i = dx_;
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            if (!upoly::is_zero(acc) && prev_i > it->first)
                acc = upoly::mul(acc, upow(cur.num_dense, prev_i - it->first), p_);
            if (!upoly::is_zero(it->second))
                acc = upoly::add(acc, upoly::mul(it->second, d1_pow.at(dx_ - it->first), p_), p_);
            prev_i = it->first;
        }
        if (!upoly::is_zero(acc) && prev_i > 0) acc = upoly::mul(acc, upow(cur.num_dense, prev_i), p_);
        return acc;
    }

    // Splits atom `idx` into g and atoms_[idx]/g, patching every live
    // exponent vector so products are preserved.
    void split_atom(std::size_t idx, const UPoly& g, std::vector<std::vector<long>*>& live) {
        auto [q, r] = upoly::divrem(atoms_[idx].poly, g, p_);
        UPoly quot = upoly::make_monic(q, p_);
        atoms_[idx].poly = g;
        atoms_.push_back({quot, atoms_[idx].birth});
        std::size_t fresh = atoms_.size() - 1;
        for (auto* v : live) {
            if (v->size() <= idx || (*v)[idx] == 0) continue;
            v->resize(fresh, 0);
            v->push_back((*v)[idx]);
        }
    }

    // Factor `work` over the atom basis: returns the exponent vector, the
    // residual scalar, and registers any non-constant leftover as a new atom.
    std::vector<long> factor(UPoly work, uint64_t& scalar_out,
                             std::vector<std::vector<long>*> live) {
        if (upoly::is_zero(work)) throw DegenerateRun{};
        std::vector<long> v(atoms_.size(), 0);
        live.push_back(&v);
        bool progress = true;
        while (progress) {
            progress = false;
            // recent atoms first: they are the likeliest divisors
            for (std::size_t r = atoms_.size(); r-- > 0;) {
                if (v.size() < atoms_.size()) v.resize(atoms_.size(), 0);
                v[r] += extract_multiplicity(work, atoms_[r].poly);
            }
            if (upoly::deg(work) >= 1 && upoly::deg(work) <= kGcdBudget) {
                // a leftover sharing only part of an atom: split and retry
                for (std::size_t r = 0; r < atoms_.size(); ++r) {
                    if (upoly::deg(atoms_[r].poly) > kGcdBudget) continue;
                    UPoly g = upoly::gcd(work, atoms_[r].poly, p_);
                    if (upoly::deg(g) >= 1 && upoly::deg(g) < upoly::deg(atoms_[r].poly)) {
                        split_atom(r, g, live);
                        progress = true;
                        break;
                    }
                }
            }
        }
        if (upoly::deg(work) >= 1) {
            UPoly monic = upoly::make_monic(work, p_);
            scalar_out = work.back();
            std::size_t idx = add_atom(monic);
            v.resize(atoms_.size(), 0);
            v[idx] += 1;
        } else {
            scalar_out = work.empty() ? 0 : work[0];
        }
        if (scalar_out == 0) throw DegenerateRun{};
        return v;
    }

    PState step(PState& prev, PState& cur, bool need_dense) {
        std::set<int> d1_need, trow_need;
        auto collect = [&](const BiPoly& poly) {
            for (const auto& [key, c] : poly.terms) {
                d1_need.insert(dx_ - key.first);
                trow_need.insert(key.second);
            }
        };
        collect(map_.num);
        if (!den_monomial_) collect(map_.den);
        std::map<int, UPoly> d1_pow, t_row;  // t_row[j] = N2^j * D2^(dy-j)
        for (int e : d1_need) d1_pow.emplace(e, upow(cur.den_dense, e));
        for (int j : trow_need)
            t_row.emplace(j, upoly::mul(upow(prev.num_dense, j), upow(prev.den_dense, dy_ - j), p_));

        UPoly p_hat = substituted(map_.num, cur, d1_pow, t_row);

        std::vector<long> den_vec;
        uint64_t den_scalar = 1;
        std::vector<std::vector<long>*> live{&prev.exps, &cur.exps};
        if (den_monomial_) {
            const auto& [key, c] = *map_.den.terms.begin();
            int qx = key.first, qy = key.second;
            if ((qx > 0 && cur.scalar == 0) || (qy > 0 && prev.scalar == 0)) throw DegenerateRun{};
            den_vec.assign(std::max(cur.exps.size(), prev.exps.size()), 0);
            for (std::size_t i = 0; i < den_vec.size(); ++i) {
                long e = static_cast<long>(qx) * std::max(exp_at(cur.exps, i), 0L) +
                         static_cast<long>(dx_ - qx) * std::max(-exp_at(cur.exps, i), 0L) +
                         static_cast<long>(qy) * std::max(exp_at(prev.exps, i), 0L) +
                         static_cast<long>(dy_ - qy) * std::max(-exp_at(prev.exps, i), 0L);
                den_vec[i] = e;
            }
            den_scalar = mpz_fdiv_ui(c.get_mpz_t(), p_);
            if (den_scalar == 0) throw DegenerateRun{};  // prime divides the map coefficient
            for (int r = 0; r < qx; ++r) den_scalar = mulmod(den_scalar, cur.scalar, p_);
            for (int r = 0; r < qy; ++r) den_scalar = mulmod(den_scalar, prev.scalar, p_);
            live.push_back(&den_vec);
        } else {
            UPoly q_hat = substituted(map_.den, cur, d1_pow, t_row);
            live.push_back(&den_vec);
            den_vec = factor(std::move(q_hat), den_scalar, live);
        }

        uint64_t num_scalar = 1;
        std::vector<long> num_vec;
        if (upoly::is_zero(p_hat)) {
            if (!map_.num.is_zero()) throw DegenerateRun{};  // bad line, not a zero map
            num_scalar = 0;
            num_vec.assign(atoms_.size(), 0);
        } else {
            num_vec = factor(std::move(p_hat), num_scalar, live);
        }

        PState next;
        if (num_scalar == 0) {
            next.scalar = 0;
            next.num_dense = UPoly{};
            next.den_dense = UPoly{1};
            next.exps.assign(atoms_.size(), 0);
            return next;
        }
        next.exps.assign(atoms_.size(), 0);
        for (std::size_t i = 0; i < next.exps.size(); ++i)
            next.exps[i] = exp_at(num_vec, i) - exp_at(den_vec, i);
        next.scalar = mulmod(num_scalar, invmod(den_scalar, p_), p_);
        if (need_dense) {  // a state produced without it must not be stepped from
            UPoly num{1}, den{1};
            for (std::size_t i = 0; i < next.exps.size(); ++i) {
                if (next.exps[i] > 0) num = upoly::mul(num, upow(atoms_[i].poly, next.exps[i]), p_);
                if (next.exps[i] < 0) den = upoly::mul(den, upow(atoms_[i].poly, -next.exps[i]), p_);
            }
            next.num_dense = upoly::scale(num, next.scalar, p_);
            next.den_dense = std::move(den);
        }
        return next;
    }

    const MapDef& map_;
    uint64_t p_;
    int dx_ = 0, dy_ = 0;
    bool den_monomial_ = false;
    std::vector<Atom> atoms_;
};

}  // namespace

DegreeProfile degree_profile_modp(const MapDef& map, int n_max, std::uint64_t prime,
                                  std::uint64_t seed) {
    if (n_max < 0) throw RingError("n_max must be non-negative");
    if (prime < 3 || prime >= (1ULL << 62) || !is_prime_u64(prime))
        throw RingError("profiler needs an odd prime below 2^62");
    SplitMix64 rng(seed);
    DegreeProfile out;
    out.prime = prime;
    out.seed = seed;
    out.note =
        "degrees measured along a generic affine line x[-1] = b0 + b1 t, x[0] = a0 + a1 t over F_p; "
        "an unlucky line or prime can undercount with probability O(d^2/p) per step";
    for (int attempt = 0; attempt < 4; ++attempt) {
        uint64_t b0 = rng.below(prime), b1 = rng.nonzero_below(prime);
        uint64_t a0 = rng.below(prime), a1 = rng.nonzero_below(prime);
        try {
            ProfileRun run(map, prime);
            out.degrees = run.run(n_max, b0, b1, a0, a1);
            out.retries = attempt;
            return out;
        } catch (const DegenerateRun&) {
            continue;  // singular line; redraw deterministically
        }
    }
    throw RingError("profiler hit a singular line on every retry; the map may be degenerate");
}

ProfileConsensus profile_consensus(
    const MapDef& map, int n_max,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& prime_seed_pairs) {
    if (prime_seed_pairs.empty()) throw RingError("profile consensus needs at least one (prime, seed) pair");
    ProfileConsensus pc;
    for (const auto& [p, s] : prime_seed_pairs) pc.runs.push_back(degree_profile_modp(map, n_max, p, s));
    pc.degrees = pc.runs.front().degrees;
    for (const auto& r : pc.runs)
        for (std::size_t i = 0; i < pc.degrees.size(); ++i)
            pc.degrees[i] = std::max(pc.degrees[i], r.degrees[i]);
    std::ostringstream diff;
    for (const auto& r : pc.runs)
        for (std::size_t i = 0; i < pc.degrees.size(); ++i)
            if (r.degrees[i] != pc.degrees[i])
                diff << "run (prime=" << r.prime << ", seed=" << r.seed << ") undercounts at n=" << i
                     << ": " << r.degrees[i] << " < " << pc.degrees[i] << "; ";
    pc.disagreement = diff.str();
    pc.agreed = pc.disagreement.empty();
    return pc;
}

int family_profile_window(int k) {
    if (k < 1) throw RingError("family exponent k must be >= 1");
    if (k <= 2) return 10;
    if (k == 3) return 8;
    if (k == 4) return 7;
    if (k <= 7) return 6;
    return 5;
}

std::string profile_csv(const ProfileConsensus& pc) {
    std::ostringstream out;
    out << "n,degree\n";
    for (std::size_t i = 0; i < pc.degrees.size(); ++i) out << i << "," << pc.degrees[i] << "\n";
    return out.str();
}

std::string profile_json(const ProfileConsensus& pc, const std::string& map_text) {
    nlohmann::json j;
    j["schema"] = "entropy-lab/1";
    j["kind"] = "degree-profile";
    j["map"] = map_text;
    j["agreed"] = pc.agreed;
    if (!pc.agreed) j["disagreement"] = pc.disagreement;
    j["degrees"] = pc.degrees;
    j["runs"] = nlohmann::json::array();
    for (const auto& r : pc.runs) {
        nlohmann::json run;
        run["prime"] = r.prime;
        run["seed"] = r.seed;
        run["retries"] = r.retries;
        run["degrees"] = r.degrees;
        run["note"] = r.note;
        j["runs"].push_back(run);
    }
    return j.dump(2);
}

}  // namespace elab::dsl
