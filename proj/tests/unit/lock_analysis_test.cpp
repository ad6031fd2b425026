#include "stublint/lock_analysis.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>
#include <tuple>

using namespace stublint;

namespace {

using L = LockState;

/// Hand-written transfer table for the two lock intrinsics:
/// (intrinsic, in) -> (out, UNBALANCED_LOCK severity if any).
struct Row {
    LockIntrinsic op;
    L in;
    L out;
    std::optional<Severity> diag;
};

const std::vector<Row> transfer_fixture{
    {LockIntrinsic::EnterBlocking, L::Bottom, L::Bottom, std::nullopt},
    {LockIntrinsic::EnterBlocking, L::Held, L::Released, std::nullopt},
    {LockIntrinsic::EnterBlocking, L::Released, L::Released, Severity::Error},
    {LockIntrinsic::EnterBlocking, L::Unknown, L::Released, Severity::Warning},
    {LockIntrinsic::LeaveBlocking, L::Bottom, L::Bottom, std::nullopt},
    {LockIntrinsic::LeaveBlocking, L::Held, L::Held, Severity::Error},
    {LockIntrinsic::LeaveBlocking, L::Released, L::Held, std::nullopt},
    {LockIntrinsic::LeaveBlocking, L::Unknown, L::Held, Severity::Warning},
};

/// Hasse diagram of the lattice written out as the set of ordered pairs.
const std::set<std::pair<L, L>> order_fixture{
    {L::Bottom, L::Bottom},   {L::Bottom, L::Held},      {L::Bottom, L::Released}, {L::Bottom, L::Unknown},
    {L::Held, L::Held},       {L::Held, L::Unknown},     {L::Released, L::Released},
    {L::Released, L::Unknown}, {L::Unknown, L::Unknown},
};

L least_upper_bound(L a, L b) {
    for (L c : {L::Bottom, L::Held, L::Released, L::Unknown}) {
        bool upper = order_fixture.count({a, c}) && order_fixture.count({b, c});
        bool least = true;
        for (L d : {L::Bottom, L::Held, L::Released, L::Unknown}) {
            if (order_fixture.count({a, d}) && order_fixture.count({b, d}) && !order_fixture.count({c, d})) {
                least = false;
            }
        }
        if (upper && least) {
            return c;
        }
    }
    FAIL("no least upper bound");
    return L::Unknown;
}

std::map<int, L> state_by_line(const testing::Analyzed& a) {
    std::map<int, L> out;
    for (const auto& n : a.cfg.nodes) {
        if (n.kind != NodeKind::Entry && n.kind != NodeKind::Exit) {
            out[n.line] = a.locks.in[n.id];
        }
    }
    return out;
}

} // namespace

TEST_SUITE("lock_analysis") {

TEST_CASE("join laws hold on all pairs") {
    for (L a : all_lock_states) {
        CHECK(join(a, a) == a);
        CHECK(join(L::Bottom, a) == a);
        CHECK(leq(a, a));
        for (L b : all_lock_states) {
            CHECK(join(a, b) == join(b, a));
            CHECK(join(a, b) == least_upper_bound(a, b));
            CHECK(leq(a, b) == (order_fixture.count({a, b}) == 1));
            if (leq(a, b) && leq(b, a)) {
                CHECK(a == b);
            }
            for (L c : all_lock_states) {
                CHECK(join(join(a, b), c) == join(a, join(b, c)));
                if (leq(a, b) && leq(b, c)) {
                    CHECK(leq(a, c));
                }
            }
        }
    }
    CHECK(join(L::Held, L::Released) == L::Unknown);
}

TEST_CASE("intrinsic transfer matches the fixture") {
    REQUIRE(transfer_fixture.size() == 8);
    for (const auto& row : transfer_fixture) {
        CAPTURE(to_string(row.in));
        CAPTURE(static_cast<int>(row.op));
        LockStep step = apply_intrinsic(row.op, row.in);
        CHECK(step.state == row.out);
        CHECK(step.unbalanced == row.diag);
    }
}

TEST_CASE("node transfer matches the fixture") {
    auto enter = testing::analyze_fn("void f(void)\n{\n  caml_enter_blocking_section();\n}\n", "f");
    auto leave = testing::analyze_fn("void f(void)\n{\n  caml_leave_blocking_section();\n}\n", "f");
    auto release = testing::analyze_fn("void f(void)\n{\n  caml_release_runtime_system();\n}\n", "f");
    for (const auto& row : transfer_fixture) {
        const auto& a = row.op == LockIntrinsic::EnterBlocking ? *enter : *leave;
        const CfgNode& node = a.cfg.nodes[2];
        TransferResult r = transfer(a.cfg, node, row.in, a.summaries, "t.c");
        CAPTURE(to_string(row.in));
        CHECK(r.state == row.out);
        if (row.diag) {
            REQUIRE(r.diags.size() == 1);
            CHECK(r.diags[0].rule == RuleId::UnbalancedLock);
            CHECK(r.diags[0].severity == *row.diag);
            CHECK(r.diags[0].loc.line == 3);
        } else {
            CHECK(r.diags.empty());
        }
        CHECK(r.gc_point == (row.op == LockIntrinsic::EnterBlocking && row.in != L::Bottom));
        if (row.op == LockIntrinsic::EnterBlocking) {
            CHECK(transfer(release->cfg, release->cfg.nodes[2], row.in, release->summaries, "t.c").state == row.out);
        }
    }
}

TEST_CASE("summary effects on ordinary calls") {
    Summaries s = Summaries::defaults();
    s.add(load_summaries("lock_it: acquires_lock\nunlock_it: releases_lock\n"));
    for (L in : {L::Held, L::Released, L::Unknown}) {
        CHECK(apply_call("lock_it", in, s).state == L::Held);
        CHECK(apply_call("unlock_it", in, s).state == L::Released);
        CHECK(apply_call("xenevtchn_notify", in, s).state == in);
        CHECK(apply_call("caml_alloc", in, s).state == in);
        CHECK_FALSE(apply_call("lock_it", in, s).unbalanced);
    }
    CHECK(is_gc_point("caml_alloc", s));
    CHECK(is_gc_point("caml_alloc_custom", s));
    CHECK(is_gc_point("unlock_it", s));
    CHECK(is_gc_point("caml_enter_blocking_section", s));
    CHECK_FALSE(is_gc_point("caml_stat_free", s));
    CHECK_FALSE(is_gc_point("xenevtchn_notify", s));
}

TEST_CASE("straight-line release and reacquire") {
    auto a = testing::analyze_fn("void f(void)\n{\n  caml_enter_blocking_section();\n  work();\n"
                                 "  caml_leave_blocking_section();\n}\n",
                                 "f");
    auto by_line = state_by_line(*a);
    CHECK(by_line.at(3) == L::Held);
    CHECK(by_line.at(4) == L::Released);
    CHECK(by_line.at(5) == L::Released);
    CHECK(a->locks.exit_state == L::Held);
    CHECK(a->locks.in[a->cfg.entry] == L::Held);
}

TEST_CASE("release on one arm only merges to Unknown") {
    auto a = testing::analyze_fn("void f(int c)\n{\n  if (c)\n    caml_enter_blocking_section();\n  work();\n}\n", "f");
    auto by_line = state_by_line(*a);
    CHECK(by_line.at(3) == L::Held);
    CHECK(by_line.at(4) == L::Held);
    CHECK(by_line.at(5) == L::Unknown);
    CHECK(a->locks.exit_state == L::Unknown);
}

TEST_CASE("empty function stays Held") {
    auto a = testing::analyze_fn("void f(void) { }\n", "f");
    CHECK(a->locks.in[a->cfg.entry] == L::Held);
    CHECK(a->locks.exit_state == L::Held);
}

TEST_CASE("loops reach a fixpoint") {
    auto a = testing::analyze_fn("void f(int n)\n{\n  while (n--) {\n    caml_enter_blocking_section();\n"
                                 "    work();\n    caml_leave_blocking_section();\n  }\n}\n",
                                 "f");
    auto by_line = state_by_line(*a);
    CHECK(by_line.at(3) == L::Held);
    CHECK(by_line.at(5) == L::Released);
    CHECK(a->locks.exit_state == L::Held);
    CHECK(lock_diagnostics(a->cfg, a->locks, a->summaries, "t.c").empty());
}

TEST_CASE("unbalanced operations are reported") {
    auto twice = testing::analyze_fn("void f(void)\n{\n  caml_enter_blocking_section();\n"
                                     "  caml_enter_blocking_section();\n  caml_leave_blocking_section();\n}\n",
                                     "f");
    auto diags = lock_diagnostics(twice->cfg, twice->locks, twice->summaries, "t.c");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].loc.line == 4);
    CHECK(diags[0].severity == Severity::Error);

    auto maybe = testing::analyze_fn("void f(int c)\n{\n  if (c)\n    caml_enter_blocking_section();\n"
                                     "  caml_leave_blocking_section();\n}\n",
                                     "f");
    diags = lock_diagnostics(maybe->cfg, maybe->locks, maybe->summaries, "t.c");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].loc.line == 5);
    CHECK(diags[0].severity == Severity::Warning);

    auto ret = testing::analyze_fn("CAMLprim value f(value v)\n{\n  CAMLparam1(v);\n  caml_enter_blocking_section();\n"
                                   "  CAMLreturn(Val_unit);\n}\n",
                                   "f");
    diags = lock_diagnostics(ret->cfg, ret->locks, ret->summaries, "t.c");
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].loc.line == 5);
    CHECK(diags[0].severity == Severity::Error);
}

TEST_CASE("worklist pops are bounded on the corpus") {
    for (const auto& side : {"bug", "fixed"}) {
        for (const auto& dir : testing::corpus_cases(side)) {
            StubUnit unit = parse_unit(testing::slurp(dir / "stubs.c"), "stubs.c");
            Summaries s = Summaries::defaults();
            for (const auto& fn : unit.functions) {
                Cfg cfg = build_cfg(fn, s);
                LockMap m = solve(cfg, s);
                CAPTURE(fn.name);
                CHECK(m.iterations <= static_cast<int>(cfg.nodes.size()) * 3);
            }
        }
    }
}

TEST_CASE("runtime calls in fixed listings all run under Held") {
    Summaries s = Summaries::defaults();
    int checked = 0;
    for (const auto& dir : testing::corpus_cases("fixed")) {
        StubUnit unit = parse_unit(testing::slurp(dir / "stubs.c"), "stubs.c");
        for (const auto& fn : unit.functions) {
            Cfg cfg = build_cfg(fn, s);
            LockMap m = solve(cfg, s);
            for (const auto& node : cfg.nodes) {
                if (!node.reachable) {
                    continue;
                }
                L state = m.in[node.id];
                std::vector<const Expr*> calls;
                collect_calls(node.expr, calls);
                for (const Expr* c : calls) {
                    std::string name = c->callee_name();
                    if (s.has(name, Effect::RequiresLock)) {
                        CAPTURE(dir.string());
                        CAPTURE(name);
                        CHECK(state == L::Held);
                        ++checked;
                    }
                    state = apply_call(name, state, s).state;
                }
            }
        }
    }
    CHECK(checked >= 10);
}

TEST_CASE("summary file format") {
    auto entries = load_summaries("# comment\n\ncaml_stat_free: no_lock_needed\nxenevtchn_notify: no_lock_needed # ext\n"
                                  "my_*: releases_lock, may_gc\n");
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].pattern == "caml_stat_free");
    CHECK(entries[0].line == 3);
    CHECK(entries[2].prefix);
    CHECK(entries[2].pattern == "my_");
    CHECK(entries[2].has(Effect::ReleasesLock));
    CHECK(entries[2].has(Effect::MayGc));
}

TEST_CASE("summary precedence") {
    Summaries s = Summaries::defaults();
    CHECK(s.has("caml_alloc", Effect::RequiresLock));
    CHECK(s.has("caml_alloc", Effect::MayGc));
    CHECK(s.has("caml_stat_free", Effect::NoLockNeeded));
    CHECK_FALSE(s.has("caml_stat_free", Effect::RequiresLock));
    CHECK(s.has("caml_alloc_custom", Effect::MayGc));
    CHECK(s.has("caml_failwith", Effect::Noreturn));
    CHECK(s.has("caml_raise_not_found", Effect::Noreturn));
    CHECK(s.lookup("xenevtchn_notify") == nullptr);
    s.add(load_summaries("xenevtchn_notify: no_lock_needed\ncaml_alloc: requires_lock\ncaml_al*: no_lock_needed\n"));
    CHECK(s.has("xenevtchn_notify", Effect::NoLockNeeded));
    CHECK_FALSE(s.has("caml_alloc", Effect::MayGc));
    CHECK(s.has("caml_alloc_small", Effect::NoLockNeeded));
    CHECK(s.has("caml_copy_string", Effect::RequiresLock));
    s.add(load_summaries("caml_alloc: no_lock_needed\n"));
    CHECK(s.has("caml_alloc", Effect::NoLockNeeded));
}

TEST_CASE("summary load errors carry the line") {
    auto line_of = [](const char* text) {
        try {
            load_summaries(text);
        } catch (const SummaryLoadError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("a: requires_lock\nb: explodes\n") == 2);
    CHECK(line_of("\n\nc: acquires_lock, releases_lock\n") == 3);
    CHECK(line_of("d: requires_lock, no_lock_needed\n") == 1);
    CHECK(line_of("no colon here\n") == 1);
    CHECK(line_of("ok: may_gc\n") == 0);
}

TEST_CASE("built-in table loads through the public parser") {
    auto entries = load_summaries(builtin_summary_text());
    CHECK(entries.size() > 10);
    bool saw_prefix = false;
    for (const auto& e : entries) {
        saw_prefix = saw_prefix || (e.prefix && e.pattern == "caml_");
    }
    CHECK(saw_prefix);
}

}
