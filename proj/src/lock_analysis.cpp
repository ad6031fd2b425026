#include "stublint/lock_analysis.hpp"

#include "stublint/intrinsics.hpp"

#include <deque>

namespace stublint {

std::string_view to_string(LockState s) {
    switch (s) {
        case LockState::Bottom: return "bottom";
        case LockState::Held: return "held";
        case LockState::Released: return "released";
        case LockState::Unknown: return "unknown";
    }
    return "?";
}

LockState join(LockState a, LockState b) {
    if (a == LockState::Bottom) return b;
    if (b == LockState::Bottom) return a;
    if (a == b) return a;
    return LockState::Unknown;
}

bool leq(LockState a, LockState b) {
    return join(a, b) == b;
}

LockStep apply_intrinsic(LockIntrinsic op, LockState in) {
    LockStep step;
    if (in == LockState::Bottom) {
        return step;
    }
    LockState required = op == LockIntrinsic::EnterBlocking ? LockState::Held : LockState::Released;
    step.state = op == LockIntrinsic::EnterBlocking ? LockState::Released : LockState::Held;
    if (in == LockState::Unknown) {
        step.unbalanced = Severity::Warning;
    } else if (in != required) {
        step.unbalanced = Severity::Error;
    }
    return step;
}

LockStep apply_call(std::string_view name, LockState in, const Summaries& summaries) {
    IntrinsicKind k = classify_call(name);
    if (k == IntrinsicKind::EnterBlocking) {
        return apply_intrinsic(LockIntrinsic::EnterBlocking, in);
    }
    if (k == IntrinsicKind::LeaveBlocking) {
        return apply_intrinsic(LockIntrinsic::LeaveBlocking, in);
    }
    LockStep step;
    step.state = in;
    if (in == LockState::Bottom) {
        return step;
    }
    unsigned eff = summaries.effects_of(name);
    if ((eff & static_cast<unsigned>(Effect::AcquiresLock)) != 0) {
        step.state = LockState::Held;
    } else if ((eff & static_cast<unsigned>(Effect::ReleasesLock)) != 0) {
        step.state = LockState::Released;
    }
    return step;
}

bool is_gc_point(std::string_view name, const Summaries& summaries) {
    if (classify_call(name) == IntrinsicKind::EnterBlocking) {
        return true;
    }
    return summaries.has(name, Effect::MayGc) || summaries.has(name, Effect::ReleasesLock);
}

namespace {

bool is_return_node(const Cfg& cfg, const CfgNode& node) {
    return node.kind == NodeKind::CamlReturn
           || (node.kind == NodeKind::Return && cfg.returns_to_ocaml);
}

} // namespace

TransferResult transfer(const Cfg& cfg, const CfgNode& node, LockState in, const Summaries& summaries,
                        const std::string& file) {
    TransferResult r;
    r.state = in;
    if (in == LockState::Bottom) {
        return r;
    }
    std::vector<const Expr*> calls;
    collect_calls(node.expr, calls);
    for (const Expr* call : calls) {
        std::string name = call->callee_name();
        if (name.empty()) {
            continue;
        }
        LockStep step = apply_call(name, r.state, summaries);
        if (step.unbalanced) {
            bool entering = classify_call(name) == IntrinsicKind::EnterBlocking;
            std::string msg = "'" + name + "' called while the runtime lock is "
                              + std::string(to_string(r.state))
                              + (entering ? "; expected it to be held" : "; expected it to be released");
            r.diags.push_back(make_diag(RuleId::UnbalancedLock, *step.unbalanced,
                                        SourceLoc{file, call->line, call->column}, msg));
        }
        if (is_gc_point(name, summaries)) {
            r.gc_point = true;
        }
        r.state = step.state;
    }
    if (is_return_node(cfg, node) && r.state != LockState::Held) {
        Severity sev = r.state == LockState::Released ? Severity::Error : Severity::Warning;
        r.diags.push_back(make_diag(RuleId::UnbalancedLock, sev, SourceLoc{file, node.line, node.column},
                                    "returning to OCaml while the runtime lock is "
                                        + std::string(to_string(r.state))));
    }
    return r;
}

LockMap solve(const Cfg& cfg, const Summaries& summaries) {
    LockMap m;
    std::size_t n = cfg.nodes.size();
    m.in.assign(n, LockState::Bottom);
    m.out.assign(n, LockState::Bottom);
    m.in[cfg.entry] = LockState::Held;

    static const std::string no_file;
    std::deque<int> work{cfg.entry};
    std::vector<bool> queued(n, false);
    queued[cfg.entry] = true;
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        queued[id] = false;
        ++m.iterations;
        const CfgNode& node = cfg.nodes[id];
        LockState out = transfer(cfg, node, m.in[id], summaries, no_file).state;
        if (out == m.out[id]) {
            continue;
        }
        m.out[id] = out;
        for (int s : node.succs) {
            LockState joined = join(m.in[s], out);
            if (joined != m.in[s]) {
                m.in[s] = joined;
                if (!queued[s]) {
                    queued[s] = true;
                    work.push_back(s);
                }
            }
        }
    }

    m.exit_state = m.in[cfg.exit];
    for (int e : cfg.exits) {
        const CfgNode& node = cfg.nodes[e];
        if (node.kind == NodeKind::Return || node.kind == NodeKind::CamlReturn) {
            m.exit_state = join(m.exit_state, m.out[e]);
        }
    }
    return m;
}

std::vector<Diagnostic> lock_diagnostics(const Cfg& cfg, const LockMap& map, const Summaries& summaries,
                                         const std::string& file) {
    std::vector<Diagnostic> out;
    for (const auto& node : cfg.nodes) {
        if (!node.reachable || map.in[node.id] == LockState::Bottom) {
            continue;
        }
        auto r = transfer(cfg, node, map.in[node.id], summaries, file);
        out.insert(out.end(), r.diags.begin(), r.diags.end());
    }
    return out;
}

} // namespace stublint
