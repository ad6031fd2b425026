#include "stublint/value_safety.hpp"

#include "stublint/intrinsics.hpp"

#include <deque>
#include <tuple>

namespace stublint {

std::string to_string(const ValueFact& f) {
    switch (f.kind) {
        case FactKind::Plain: return "plain";
        case FactKind::OcamlValue: return "ocaml_value";
        case FactKind::HeapDerived: return f.stale ? "heap_derived(stale)" : "heap_derived";
    }
    return "?";
}

ValueFact join(const ValueFact& a, const ValueFact& b) {
    if (a.kind == FactKind::HeapDerived || b.kind == FactKind::HeapDerived) {
        bool stale = (a.kind == FactKind::HeapDerived && a.stale)
                     || (b.kind == FactKind::HeapDerived && b.stale);
        return ValueFact{FactKind::HeapDerived, stale};
    }
    if (a.kind == FactKind::OcamlValue || b.kind == FactKind::OcamlValue) {
        return ValueFact{FactKind::OcamlValue, false};
    }
    return ValueFact{};
}

namespace {

constexpr ValueFact plain{};
constexpr ValueFact ocaml_value{FactKind::OcamlValue, false};

bool is_value_type(const CType* t) {
    return t != nullptr && t->is_value();
}

FactEnv join_env(const FactEnv& a, const FactEnv& b) {
    FactEnv out = a;
    for (const auto& [name, fact] : b) {
        auto it = out.find(name);
        out[name] = it == out.end() ? fact : join(it->second, fact);
    }
    return out;
}

/// Evaluates one node's expression, updating facts and lock state in
/// evaluation order. Events are recorded only when `events` is set.
class Evaluator {
public:
    Evaluator(const StubFunction& fn, const Summaries& summaries, const std::set<std::string>& degraded,
              FactEnv& env, LockState lock, int node, std::vector<DerefEvent>* events)
        : fn_(fn), summaries_(summaries), degraded_(degraded), env_(env), lock_(lock), node_(node),
          events_(events) {}

    ValueFact eval(const Expr* e) {
        if (e == nullptr) {
            return plain;
        }
        switch (e->kind) {
            case ExprKind::Ident: return ident(e->text);
            case ExprKind::IntLit:
            case ExprKind::FloatLit:
            case ExprKind::StrLit:
            case ExprKind::CharLit:
            case ExprKind::SizeofType:
            case ExprKind::SizeofExpr:
            case ExprKind::Opaque:
                return plain;
            case ExprKind::Call: return call(e);
            case ExprKind::Unary: return unary(e);
            case ExprKind::Postfix: return eval(e->kid(0));
            case ExprKind::Binary: {
                ValueFact a = eval(e->kid(0));
                ValueFact b = eval(e->kid(1));
                if (e->text == ",") {
                    return b;
                }
                if (e->text == "+" || e->text == "-") {
                    if (a.kind == FactKind::HeapDerived) return a;
                    if (b.kind == FactKind::HeapDerived && e->text == "+") return b;
                }
                return plain;
            }
            case ExprKind::Assign: return assign(e);
            case ExprKind::Cast: {
                ValueFact f = eval(e->kid(0));
                if (e->type.is_pointer()) {
                    if (f.kind == FactKind::OcamlValue) {
                        return fresh();
                    }
                    return f.kind == FactKind::HeapDerived ? f : plain;
                }
                if (e->type.is_value()) {
                    return f.kind == FactKind::Plain ? plain : ocaml_value;
                }
                return plain;
            }
            case ExprKind::Member: {
                ValueFact base = eval(e->kid(0));
                if (e->arrow) {
                    deref(e, e->kid(0), base, DerefKind::ExplicitDeref);
                }
                return result_of_load(e);
            }
            case ExprKind::Index: {
                ValueFact base = eval(e->kid(0));
                eval(e->kid(1));
                deref(e, e->kid(0), base, DerefKind::ExplicitDeref);
                return result_of_load(e);
            }
            case ExprKind::Ternary: {
                eval(e->kid(0));
                ValueFact a = eval(e->kid(1));
                ValueFact b = eval(e->kid(2));
                return join(a, b);
            }
            case ExprKind::InitList:
            case ExprKind::CompoundLit:
                for (const auto& k : e->kids) {
                    eval(k.get());
                }
                return plain;
        }
        return plain;
    }

    void assign_var(const std::string& var, ValueFact rhs) {
        if (degraded_.count(var) != 0) {
            env_[var] = plain;
            return;
        }
        const CType* t = fn_.type_of(var);
        ValueFact f = plain;
        if (is_value_type(t)) {
            f = ocaml_value;
        } else if (rhs.kind == FactKind::HeapDerived) {
            f = rhs;
            // Re-deriving while the lock is not held keeps earlier staleness.
            if (lock_ != LockState::Held) {
                auto it = env_.find(var);
                if (it != env_.end() && it->second.kind == FactKind::HeapDerived && it->second.stale) {
                    f.stale = true;
                }
            }
        } else if (rhs.kind == FactKind::OcamlValue && t != nullptr && t->is_pointer()
                   && !t->is_value_pointer()) {
            f = fresh();
        }
        env_[var] = f;
    }

    LockState lock() const { return lock_; }

private:
    const StubFunction& fn_;
    const Summaries& summaries_;
    const std::set<std::string>& degraded_;
    FactEnv& env_;
    LockState lock_;
    int node_;
    std::vector<DerefEvent>* events_;

    static ValueFact fresh() { return ValueFact{FactKind::HeapDerived, false}; }

    ValueFact ident(const std::string& name) {
        if (degraded_.count(name) != 0) {
            return plain;
        }
        if (auto it = env_.find(name); it != env_.end()) {
            return it->second;
        }
        return is_value_type(fn_.type_of(name)) ? ocaml_value : plain;
    }

    std::optional<CType> static_type(const Expr* e) const {
        if (e == nullptr) {
            return std::nullopt;
        }
        switch (e->kind) {
            case ExprKind::Ident:
                if (const CType* t = fn_.type_of(e->text)) {
                    return *t;
                }
                return std::nullopt;
            case ExprKind::Cast:
                return e->type;
            case ExprKind::Unary:
                if (e->text == "*") {
                    auto t = static_type(e->kid(0));
                    if (t && t->is_pointer() && t->pointee) {
                        return *t->pointee;
                    }
                }
                return std::nullopt;
            case ExprKind::Index: {
                auto t = static_type(e->kid(0));
                if (t && t->is_pointer() && t->pointee) {
                    return *t->pointee;
                }
                return std::nullopt;
            }
            case ExprKind::Call: {
                std::string name = e->callee_name();
                if (name == "Field" || name == "Some_val" || classify_call(name) == IntrinsicKind::Alloc) {
                    return CType::value();
                }
                return std::nullopt;
            }
            default:
                return std::nullopt;
        }
    }

    ValueFact result_of_load(const Expr* e) const {
        auto t = static_type(e);
        return t && t->is_value() ? ocaml_value : plain;
    }

    void deref(const Expr* site, const Expr* subject, ValueFact f, DerefKind kind) {
        if (f.kind == FactKind::Plain || events_ == nullptr) {
            return;
        }
        DerefEvent ev;
        ev.line = site->line;
        ev.column = site->column;
        ev.kind = kind;
        ev.subject = subject != nullptr ? subject->sketch() : site->sketch();
        ev.fact = f;
        ev.lock = lock_;
        ev.node = node_;
        events_->push_back(std::move(ev));
    }

    ValueFact unary(const Expr* e) {
        const std::string& op = e->text;
        if (op == "&") {
            return address_of(e->kid(0));
        }
        ValueFact f = eval(e->kid(0));
        if (op == "*") {
            deref(e, e->kid(0), f, DerefKind::ExplicitDeref);
            return result_of_load(e);
        }
        if (op == "++" || op == "--") {
            return f;
        }
        return plain;
    }

    /// `&x`, `&p->f`, `&a[i]`, `&*p`: address arithmetic, no memory read.
    ValueFact address_of(const Expr* operand) {
        if (operand == nullptr) {
            return plain;
        }
        switch (operand->kind) {
            case ExprKind::Member:
                if (operand->arrow) {
                    ValueFact base = eval(operand->kid(0));
                    return base.kind == FactKind::Plain ? plain : ValueFact{FactKind::HeapDerived, base.stale};
                }
                return address_of(operand->kid(0));
            case ExprKind::Index: {
                ValueFact base = eval(operand->kid(0));
                eval(operand->kid(1));
                return base.kind == FactKind::Plain ? plain : ValueFact{FactKind::HeapDerived, base.stale};
            }
            case ExprKind::Unary:
                if (operand->text == "*") {
                    return eval(operand->kid(0));
                }
                eval(operand);
                return plain;
            case ExprKind::Ident:
                return plain;
            default:
                eval(operand);
                return plain;
        }
    }

    ValueFact assign(const Expr* e) {
        ValueFact rhs = eval(e->kid(1));
        const Expr* lhs = e->kid(0);
        if (lhs != nullptr && lhs->kind == ExprKind::Ident) {
            if (e->text == "=") {
                assign_var(lhs->text, rhs);
            }
            return ident(lhs->text);
        }
        eval(lhs);
        return rhs;
    }

    void make_stale() {
        for (auto& [name, f] : env_) {
            if (f.kind == FactKind::HeapDerived) {
                f.stale = true;
            }
        }
    }

    ValueFact call(const Expr* e) {
        std::string name = e->callee_name();
        IntrinsicKind kind = classify_call(name);
        auto arg = [&](std::size_t i) { return e->kid(i + 1); };
        std::size_t nargs = e->kids.size() - 1;

        switch (kind) {
            case IntrinsicKind::DataCustomVal:
            case IntrinsicKind::DataAbstractVal: {
                ValueFact f = eval(arg(0));
                return f.kind == FactKind::Plain ? plain : fresh();
            }
            case IntrinsicKind::FieldRead:
            case IntrinsicKind::FieldWrite:
            case IntrinsicKind::StringVal: {
                ValueFact f = eval(arg(0));
                for (std::size_t i = 1; i < nargs; ++i) {
                    eval(arg(i));
                }
                deref(e, arg(0), f, DerefKind::ValueMacroDeref);
                if (kind == IntrinsicKind::StringVal) {
                    return f.kind == FactKind::Plain ? plain : fresh();
                }
                if (name == "Op_val") {
                    return f.kind == FactKind::Plain ? plain : fresh();
                }
                return result_of_load(e);
            }
            case IntrinsicKind::IntVal:
            case IntrinsicKind::ValInt:
                for (std::size_t i = 0; i < nargs; ++i) {
                    eval(arg(i));
                }
                return plain;
            default:
                break;
        }

        for (std::size_t i = 0; i < nargs; ++i) {
            eval(arg(i));
        }
        if (name.empty()) {
            eval(e->kid(0));
            return plain;
        }
        if (summaries_.has(name, Effect::RequiresLock) && events_ != nullptr) {
            DerefEvent ev;
            ev.line = e->line;
            ev.column = e->column;
            ev.kind = DerefKind::RuntimeCall;
            ev.subject = name;
            ev.lock = lock_;
            ev.node = node_;
            events_->push_back(std::move(ev));
        }
        lock_ = apply_call(name, lock_, summaries_).state;
        if (is_gc_point(name, summaries_)) {
            make_stale();
        }
        return kind == IntrinsicKind::Alloc ? ocaml_value : plain;
    }
};

/// Value variables whose address is handed to a function outside the
/// intrinsic and runtime tables.
void find_escapes(const Expr* e, const StubFunction& fn, std::set<std::string>& out,
                  std::vector<std::pair<std::string, const Expr*>>& sites) {
    if (e == nullptr) {
        return;
    }
    if (e->kind == ExprKind::Call) {
        std::string name = e->callee_name();
        bool known = name.rfind("caml_", 0) == 0 || classify_call(name) != IntrinsicKind::None;
        if (!known) {
            for (std::size_t i = 1; i < e->kids.size(); ++i) {
                const Expr* a = e->kid(i);
                while (a != nullptr && a->kind == ExprKind::Cast) {
                    a = a->kid(0);
                }
                if (a != nullptr && a->kind == ExprKind::Unary && a->text == "&" && a->kid(0) != nullptr
                    && a->kid(0)->kind == ExprKind::Ident && is_value_type(fn.type_of(a->kid(0)->text))) {
                    if (out.insert(a->kid(0)->text).second) {
                        sites.emplace_back(a->kid(0)->text, e);
                    }
                }
            }
        }
    }
    for (const auto& k : e->kids) {
        find_escapes(k.get(), fn, out, sites);
    }
}

FactEnv initial_env(const StubFunction& fn) {
    FactEnv env;
    for (const auto& p : fn.params) {
        env[p.name] = p.type.is_value() ? ocaml_value : plain;
    }
    for (const auto& l : fn.locals) {
        env[l.name] = l.type.is_value() ? ocaml_value : plain;
    }
    return env;
}

FactEnv run_node(const Cfg& cfg, const CfgNode& node, FactEnv env, LockState lock, const Summaries& summaries,
                 const std::set<std::string>& degraded, std::vector<DerefEvent>* events) {
    if (node.kind == NodeKind::Opaque) {
        for (auto& [name, f] : env) {
            if (f.kind == FactKind::HeapDerived) {
                f = plain;
            }
        }
    }
    Evaluator ev(*cfg.fn, summaries, degraded, env, lock, node.id, events);
    if (node.kind == NodeKind::Decl && node.decl != nullptr) {
        ValueFact rhs = ev.eval(node.expr);
        ev.assign_var(node.decl->name, rhs);
    } else {
        ev.eval(node.expr);
    }
    return env;
}

} // namespace

ValueTrack track_values(const Cfg& cfg, const LockMap& locks, const Summaries& summaries,
                        const std::string& file) {
    ValueTrack t;
    const StubFunction& fn = *cfg.fn;
    std::vector<std::pair<std::string, const Expr*>> sites;
    for (const auto& node : cfg.nodes) {
        find_escapes(node.expr, fn, t.degraded, sites);
    }
    for (const auto& [var, call] : sites) {
        t.notes.push_back(make_diag(RuleId::Note, Severity::Note, SourceLoc{file, call->line, call->column},
                                    "address of value '" + var + "' passed to '" + call->callee_name()
                                        + "'; its facts are no longer tracked"));
    }

    std::size_t n = cfg.nodes.size();
    t.in.assign(n, std::nullopt);
    std::vector<std::optional<FactEnv>> out(n);
    t.in[cfg.entry] = initial_env(fn);
    std::deque<int> work{cfg.entry};
    std::vector<bool> queued(n, false);
    queued[cfg.entry] = true;
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        queued[id] = false;
        const CfgNode& node = cfg.nodes[id];
        FactEnv res = run_node(cfg, node, *t.in[id], locks.in[id], summaries, t.degraded, nullptr);
        if (out[id] && *out[id] == res) {
            continue;
        }
        out[id] = res;
        for (int s : node.succs) {
            FactEnv joined = t.in[s] ? join_env(*t.in[s], res) : res;
            if (!t.in[s] || joined != *t.in[s]) {
                t.in[s] = std::move(joined);
                if (!queued[s]) {
                    queued[s] = true;
                    work.push_back(s);
                }
            }
        }
    }

    for (const auto& node : cfg.nodes) {
        if (!t.in[node.id] || !node.reachable || locks.in[node.id] == LockState::Bottom) {
            continue;
        }
        run_node(cfg, node, *t.in[node.id], locks.in[node.id], summaries, t.degraded, &t.events);
    }
    return t;
}

std::vector<Diagnostic> check_deref_safety(const std::vector<DerefEvent>& events, const std::string& file) {
    std::vector<Diagnostic> out;
    std::set<std::tuple<int, int, int, std::string>> seen;
    for (const auto& ev : events) {
        if (!seen.insert({ev.line, ev.column, static_cast<int>(ev.kind), ev.subject}).second) {
            continue;
        }
        SourceLoc loc{file, ev.line, ev.column};
        if (ev.kind == DerefKind::RuntimeCall) {
            if (ev.lock == LockState::Released || ev.lock == LockState::Unknown) {
                Severity sev = ev.lock == LockState::Released ? Severity::Error : Severity::Warning;
                out.push_back(make_diag(RuleId::RuntimeCallUnlocked, sev, loc,
                                        "runtime function '" + ev.subject + "' called while the runtime lock is "
                                            + std::string(to_string(ev.lock))));
            }
            continue;
        }
        if (ev.fact.kind == FactKind::HeapDerived && ev.fact.stale) {
            out.push_back(make_diag(RuleId::DerivedPtrStale, Severity::Error, loc,
                                    "'" + ev.subject
                                        + "' points into an OCaml block that may have moved since it was derived"));
            continue;
        }
        if (ev.lock == LockState::Released || ev.lock == LockState::Unknown) {
            Severity sev = ev.lock == LockState::Released ? Severity::Error : Severity::Warning;
            std::string what = ev.fact.kind == FactKind::HeapDerived ? "pointer into OCaml value" : "OCaml value";
            out.push_back(make_diag(RuleId::ValueDerefUnlocked, sev, loc,
                                    "dereference of " + what + " '" + ev.subject + "' while the runtime lock is "
                                        + std::string(to_string(ev.lock))));
        }
    }
    return out;
}

std::vector<Diagnostic> check_camlparam(const StubFunction& fn, const std::string& file) {
    std::vector<Diagnostic> out;
    if (!fn.is_camlprim || fn.parse_failed || !fn.body) {
        return out;
    }
    bool has_values = fn.value_param_count() > 0;
    for (const auto& l : fn.locals) {
        has_values |= l.type.is_value() || l.type.is_value_pointer();
    }
    if (!has_values) {
        return out;
    }

    const Stmt* first = nullptr;
    const Stmt* first_param = nullptr;
    int total = 0;
    for (const auto& s : fn.body->children) {
        if (first == nullptr) {
            bool uninitialized_decl = s->kind == StmtKind::Decl
                                      && std::all_of(s->decls.begin(), s->decls.end(),
                                                     [](const Declarator& d) { return !d.init; });
            if (!uninitialized_decl && s->kind != StmtKind::Empty) {
                first = s.get();
            }
        }
        if (s->kind == StmtKind::CamlParam) {
            total += s->count;
            first_param = first_param != nullptr ? first_param : s.get();
        }
    }
    if (first == nullptr || first->kind != StmtKind::CamlParam) {
        int line = first != nullptr ? first->line : fn.line;
        int column = first != nullptr ? first->column : fn.column;
        out.push_back(make_diag(RuleId::MissingCamlparam, Severity::Warning, SourceLoc{file, line, column},
                                "'" + fn.name + "' has value parameters or locals but does not begin with CAMLparam"));
    }
    if (first_param != nullptr && static_cast<std::size_t>(total) != fn.value_param_count()) {
        out.push_back(make_diag(RuleId::CamlparamArity, Severity::Warning,
                                SourceLoc{file, first_param->line, first_param->column},
                                "'" + fn.name + "' registers " + std::to_string(total) + " parameters with CAMLparam but has "
                                    + std::to_string(fn.value_param_count()) + " value parameters"));
    }
    return out;
}

} // namespace stublint
