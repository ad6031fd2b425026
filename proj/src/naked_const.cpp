#include "stublint/naked_const.hpp"

#include "stublint/intrinsics.hpp"

#include <cctype>
#include <deque>

namespace stublint {

ConstEnv join(const ConstEnv& a, const ConstEnv& b) {
    ConstEnv out;
    for (const auto& [name, k] : a) {
        auto it = b.find(name);
        if (it != b.end() && it->second == k) {
            out.emplace(name, k);
        }
    }
    return out;
}

namespace {

std::optional<long long> parse_int_literal(std::string text) {
    while (!text.empty() && (text.back() == 'u' || text.back() == 'U' || text.back() == 'l' || text.back() == 'L')) {
        text.pop_back();
    }
    if (text.empty()) {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(text, &used, 0);
        if (used != text.size()) {
            return std::nullopt;
        }
        return static_cast<long long>(v);
    } catch (...) {
        return std::nullopt;
    }
}

std::optional<long long> parse_char_literal(const std::string& text) {
    if (text.size() < 3 || text.front() != '\'' || text.back() != '\'') {
        return std::nullopt;
    }
    std::string body = text.substr(1, text.size() - 2);
    if (body.size() == 1) {
        return static_cast<unsigned char>(body[0]);
    }
    if (body.size() == 2 && body[0] == '\\') {
        switch (body[1]) {
            case '0': return 0;
            case 'n': return '\n';
            case 't': return '\t';
            case 'r': return '\r';
            case '\\': return '\\';
            case '\'': return '\'';
            default: return std::nullopt;
        }
    }
    return std::nullopt;
}

unsigned long long u(long long v) {
    return static_cast<unsigned long long>(v);
}

} // namespace

std::optional<long long> eval_const(const Expr* e, const ConstEnv& env) {
    if (e == nullptr) {
        return std::nullopt;
    }
    switch (e->kind) {
        case ExprKind::IntLit: return parse_int_literal(e->text);
        case ExprKind::CharLit: return parse_char_literal(e->text);
        case ExprKind::Ident: {
            if (auto it = env.find(e->text); it != env.end()) {
                return it->second;
            }
            return macro_constant(e->text);
        }
        case ExprKind::Cast: return eval_const(e->kid(0), env);
        case ExprKind::Unary: {
            auto v = eval_const(e->kid(0), env);
            if (!v) return std::nullopt;
            if (e->text == "-") return static_cast<long long>(0ULL - u(*v));
            if (e->text == "+") return v;
            return std::nullopt;
        }
        case ExprKind::Binary: {
            auto a = eval_const(e->kid(0), env);
            auto b = eval_const(e->kid(1), env);
            if (!a || !b) return std::nullopt;
            if (e->text == "+") return static_cast<long long>(u(*a) + u(*b));
            if (e->text == "-") return static_cast<long long>(u(*a) - u(*b));
            if (e->text == "|") return *a | *b;
            if (e->text == "<<") {
                if (*b < 0 || *b > 63) return std::nullopt;
                return static_cast<long long>(u(*a) << *b);
            }
            return std::nullopt;
        }
        case ExprKind::Call: {
            std::string name = e->callee_name();
            if (e->kids.size() != 2) {
                return std::nullopt;
            }
            auto k = eval_const(e->kid(1), env);
            if (!k) return std::nullopt;
            if (name == "Val_int" || name == "Val_long") {
                return static_cast<long long>((u(*k) << 1) + 1);
            }
            if (name == "Val_bool") {
                return *k != 0 ? 3 : 1;
            }
            return std::nullopt;
        }
        default:
            return std::nullopt;
    }
}

namespace {

void find_address_taken(const Expr* e, std::set<std::string>& out) {
    if (e == nullptr) {
        return;
    }
    if (e->kind == ExprKind::Unary && e->text == "&" && e->kid(0) != nullptr
        && e->kid(0)->kind == ExprKind::Ident) {
        out.insert(e->kid(0)->text);
    }
    for (const auto& k : e->kids) {
        find_address_taken(k.get(), out);
    }
}

bool is_local(const StubFunction& fn, const std::string& name) {
    VarScope s = fn.scope_of(name);
    return s == VarScope::Local || s == VarScope::Param;
}

/// Static type of an assignment destination, when it is known to be an
/// OCaml value slot.
bool is_value_destination(const StubFunction& fn, const Expr* lhs) {
    if (lhs == nullptr) {
        return false;
    }
    auto value_ptr = [&](const Expr* base) {
        if (base != nullptr && base->kind == ExprKind::Ident) {
            const CType* t = fn.type_of(base->text);
            return t != nullptr && t->is_value_pointer();
        }
        if (base != nullptr && base->kind == ExprKind::Cast) {
            return base->type.is_value_pointer();
        }
        return false;
    };
    switch (lhs->kind) {
        case ExprKind::Ident: {
            const CType* t = fn.type_of(lhs->text);
            return t != nullptr && t->is_value();
        }
        case ExprKind::Index: return value_ptr(lhs->kid(0));
        case ExprKind::Unary: return lhs->text == "*" && value_ptr(lhs->kid(0));
        case ExprKind::Call: return lhs->callee_name() == "Field";
        default: return false;
    }
}

/// Walks assignments in evaluation order, updating `env` and, when `diags`
/// is set, reporting constant even values stored into value slots.
class Walker {
public:
    Walker(const StubFunction& fn, const std::set<std::string>& address_taken, ConstEnv& env,
           std::vector<Diagnostic>* diags, const std::string& file)
        : fn_(fn), address_taken_(address_taken), env_(env), diags_(diags), file_(file) {}

    void walk(const Expr* e) {
        if (e == nullptr) {
            return;
        }
        switch (e->kind) {
            case ExprKind::SizeofType:
            case ExprKind::SizeofExpr:
                return;
            case ExprKind::Assign: {
                walk(e->kid(1));
                walk_lvalue(e->kid(0));
                std::optional<long long> k;
                if (e->text == "=") {
                    k = eval_const(e->kid(1), env_);
                    check(e->kid(0), k, e->line, e->column);
                }
                set(e->kid(0), k);
                return;
            }
            case ExprKind::Unary:
            case ExprKind::Postfix:
                walk(e->kid(0));
                if (e->text == "++" || e->text == "--") {
                    set(e->kid(0), std::nullopt);
                }
                return;
            default:
                for (const auto& k : e->kids) {
                    walk(k.get());
                }
        }
    }

    void declare(const Declarator& d) {
        walk(d.init.get());
        std::optional<long long> k = eval_const(d.init.get(), env_);
        if (d.type.is_value()) {
            report(k, d.name, d.line, d.column);
        }
        if (k && address_taken_.count(d.name) == 0) {
            env_[d.name] = *k;
        } else {
            env_.erase(d.name);
        }
    }

private:
    const StubFunction& fn_;
    const std::set<std::string>& address_taken_;
    ConstEnv& env_;
    std::vector<Diagnostic>* diags_;
    const std::string& file_;

    void walk_lvalue(const Expr* lhs) {
        if (lhs != nullptr && lhs->kind != ExprKind::Ident) {
            walk(lhs);
        }
    }

    void set(const Expr* lhs, std::optional<long long> k) {
        if (lhs == nullptr || lhs->kind != ExprKind::Ident) {
            return;
        }
        const std::string& name = lhs->text;
        if (k && is_local(fn_, name) && address_taken_.count(name) == 0) {
            env_[name] = *k;
        } else {
            env_.erase(name);
        }
    }

    void check(const Expr* lhs, std::optional<long long> k, int line, int column) {
        if (is_value_destination(fn_, lhs)) {
            report(k, lhs->sketch(), line, column);
        }
    }

    void report(std::optional<long long> k, const std::string& what, int line, int column) {
        if (diags_ == nullptr || !k || (u(*k) & 1U) != 0) {
            return;
        }
        diags_->push_back(make_diag(RuleId::NakedPointer, Severity::Error, SourceLoc{file_, line, column},
                                    "constant " + std::to_string(*k) + " stored into OCaml value '" + what
                                        + "' is a naked pointer"));
    }
};

void run_node(const Cfg& cfg, const CfgNode& node, const std::set<std::string>& address_taken, ConstEnv& env,
              std::vector<Diagnostic>* diags, const std::string& file) {
    Walker w(*cfg.fn, address_taken, env, diags, file);
    if (node.kind == NodeKind::Decl && node.decl != nullptr) {
        w.declare(*node.decl);
    } else {
        w.walk(node.expr);
    }
}

} // namespace

ConstMap propagate_constants(const Cfg& cfg) {
    ConstMap m;
    for (const auto& node : cfg.nodes) {
        find_address_taken(node.expr, m.address_taken);
    }
    std::size_t n = cfg.nodes.size();
    m.in.assign(n, std::nullopt);
    std::vector<std::optional<ConstEnv>> out(n);
    m.in[cfg.entry] = ConstEnv{};
    std::deque<int> work{cfg.entry};
    std::vector<bool> queued(n, false);
    queued[cfg.entry] = true;
    static const std::string no_file;
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        queued[id] = false;
        ConstEnv env = *m.in[id];
        run_node(cfg, cfg.nodes[id], m.address_taken, env, nullptr, no_file);
        if (out[id] && *out[id] == env) {
            continue;
        }
        out[id] = env;
        for (int s : cfg.nodes[id].succs) {
            ConstEnv joined = m.in[s] ? join(*m.in[s], env) : env;
            if (!m.in[s] || joined != *m.in[s]) {
                m.in[s] = std::move(joined);
                if (!queued[s]) {
                    queued[s] = true;
                    work.push_back(s);
                }
            }
        }
    }
    return m;
}

std::vector<Diagnostic> check_naked(const Cfg& cfg, const ConstMap& consts, const std::string& file) {
    std::vector<Diagnostic> out;
    for (const auto& node : cfg.nodes) {
        if (!consts.in[node.id]) {
            continue;
        }
        ConstEnv env = *consts.in[node.id];
        run_node(cfg, node, consts.address_taken, env, &out, file);
    }
    return out;
}

} // namespace stublint
