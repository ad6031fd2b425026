#include "stublint/c_ast.hpp"
#include "stublint/cfg.hpp"
#include "stublint/intrinsics.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace stublint;

namespace {

const Stmt& first_stmt(const StubFunction& fn) {
    REQUIRE(fn.body);
    REQUIRE_FALSE(fn.body->children.empty());
    return *fn.body->children[0];
}

bool has_edge(const Cfg& cfg, int from, int to) {
    const auto& s = cfg.nodes[from].succs;
    return std::find(s.begin(), s.end(), to) != s.end();
}

int node_at_line(const Cfg& cfg, int line) {
    for (const auto& n : cfg.nodes) {
        if (n.line == line && n.kind != NodeKind::Entry && n.kind != NodeKind::Exit) {
            return n.id;
        }
    }
    FAIL("no node at line " << line);
    return -1;
}

std::string compact(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    return s;
}

const char* const notify_src =
    "CAMLprim value stub_eventchn_notify(value xce, value port)\n"   // 1
    "{\n"                                                            // 2
    "        CAMLparam2(xce, port);\n"                               // 3
    "        int rc;\n"                                              // 4
    "\n"                                                             // 5
    "        caml_enter_blocking_section();\n"                       // 6
    "\n"                                                             // 7
    "        rc = xenevtchn_notify(_H(xce), Int_val(port));\n"       // 8
    "\n"                                                             // 9
    "        caml_leave_blocking_section();\n"                       // 10
    "\n"                                                             // 11
    "        if (rc == -1)\n"                                        // 12
    "                caml_failwith(\"evtchn notify failed\");\n"     // 13
    "\n"                                                             // 14
    "        CAMLreturn(Val_unit);\n"                                // 15
    "}\n";

} // namespace

TEST_SUITE("c_frontend") {

TEST_CASE("deref form of _H expands over Data_custom_val") {
    auto pre = preprocess_local("#define _H(__h) (*((xenevtchn_handle **)Data_custom_val(__h)))\n"
                                "x = _H(xce);\n",
                                "t.c");
    REQUIRE(pre.macros.count("_H") == 1);
    CHECK(pre.macros.at("_H").function_like);
    std::string text = compact(pre.text());
    CHECK(text.find("(*((xenevtchn_handle**)Data_custom_val(xce)))") != std::string::npos);
    CHECK(text.find("_H") == std::string::npos);
}

TEST_CASE("cast form of _H expands without a deref") {
    auto pre = preprocess_local("#define _H(__h) ((xenevtchn_handle *)(__h))\nx = _H(xce);\n", "t.c");
    std::string text = compact(pre.text());
    CHECK(text.find("x=((xenevtchn_handle*)(xce));") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '*') == 1);
}

TEST_CASE("expanded tokens carry the use-site location") {
    auto pre = preprocess_local("#define ONE 1\n\nint x = ONE;\n", "t.c");
    auto it = std::find_if(pre.tokens.begin(), pre.tokens.end(), [](const Token& t) { return t.text == "1"; });
    REQUIRE(it != pre.tokens.end());
    CHECK(it->line == 3);
    CHECK(it->column == 9);
}

TEST_CASE("source without directives is unchanged") {
    std::string src = "int f(int a)\n{\n  return a + 1;\n}\n";
    auto pre = preprocess_local(src, "t.c");
    CHECK(pre.macros.empty());
    CHECK(pre.includes.empty());
    auto normalize = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' '; }), s.end());
        return s;
    };
    CHECK(normalize(pre.text()) == normalize(src));
}

TEST_CASE("includes are recorded") {
    auto pre = preprocess_local("#include <caml/mlvalues.h>\n#include \"local.h\"\nint x;\n", "t.c");
    CHECK(pre.includes == std::vector<std::string>{"caml/mlvalues.h", "local.h"});
}

TEST_CASE("recursive macros are rejected") {
    CHECK_THROWS_AS(preprocess_local("#define A (A + 1)\nint x = A;\n", "t.c"), CParseError);
    CHECK_THROWS_AS(preprocess_local("#define A B\n#define B A\nint x = A;\n", "t.c"), CParseError);
    try {
        preprocess_local("#define LOOP(x) LOOP(x)\n", "t.c");
        FAIL("expected an error");
    } catch (const CParseError& e) {
        CHECK(std::string(e.what()).find("LOOP") != std::string::npos);
    }
}

TEST_CASE("unterminated continuation is rejected") {
    CHECK_THROWS_AS(preprocess_local("#define A 1 + \\", "t.c"), CParseError);
}

TEST_CASE("conditional compilation") {
    auto pre = preprocess_local("#if 0\nint dead;\n#endif\n"
                                "#ifdef HAVE_FOO\nint foo;\n#else\nint nofoo;\n#endif\n"
                                "#define LOCAL 1\n#if LOCAL\nint local;\n#endif\n",
                                "t.c");
    std::string text = pre.text();
    CHECK(text.find("dead") == std::string::npos);
    CHECK(text.find("nofoo") != std::string::npos);
    CHECK(text.find("int foo") == std::string::npos);
    CHECK(text.find("int local") != std::string::npos);
    REQUIRE(pre.notes.size() == 1);
    CHECK(pre.notes[0].rule == RuleId::Note);
    CHECK(pre.notes[0].loc.line == 4);
    CHECK(pre.notes[0].message.find("HAVE_FOO") != std::string::npos);
}

TEST_CASE("CAMLparam0 is an intrinsic") {
    auto unit = parse_unit("CAMLprim value stub_eventchn_init(void)\n{\n  CAMLparam0();\n  CAMLreturn(Val_unit);\n}\n",
                           "t.c");
    const auto* fn = unit.find_function("stub_eventchn_init");
    REQUIRE(fn);
    CHECK(fn->void_params);
    CHECK(fn->params.empty());
    CHECK(fn->is_camlprim);
    const Stmt& s = first_stmt(*fn);
    CHECK(s.kind == StmtKind::CamlParam);
    CHECK(s.count == 0);
    int n = -1;
    CHECK(classify_statement_macro("CAMLparam0", n) == IntrinsicKind::CamlParam);
    CHECK(n == 0);
}

TEST_CASE("function signatures") {
    auto unit = parse_unit("static inline xc_interface *xch_of_val(value v) { return 0; }\n"
                           "value add_nat_bytecode(value *argv, int argn) { return Val_unit; }\n"
                           "CAMLprim value f(value a, value b, value c) { CAMLparam3(a, b, c); CAMLreturn(Val_unit); }\n",
                           "t.c");
    REQUIRE(unit.functions.size() == 3);
    CHECK_FALSE(unit.functions[0].is_camlprim);
    CHECK(unit.functions[0].is_static);
    CHECK(unit.functions[0].return_type.is_pointer());
    CHECK(unit.functions[1].is_camlprim);
    CHECK(unit.functions[1].params[0].type.is_value_pointer());
    CHECK(unit.functions[1].value_param_count() == 0);
    CHECK(unit.functions[2].value_param_count() == 3);
}

TEST_CASE("identifiers resolve to parameters, locals, globals or unknown externs") {
    auto unit = parse_unit("static int counter;\n"
                           "CAMLprim value f(value a)\n{\n  CAMLparam1(a);\n  CAMLlocal1(r);\n  int n = 1;\n"
                           "  r = helper(a, n, counter);\n  CAMLreturn(r);\n}\n",
                           "t.c");
    const auto* fn = unit.find_function("f");
    REQUIRE(fn);
    CHECK(fn->scope_of("a") == VarScope::Param);
    CHECK(fn->scope_of("r") == VarScope::Local);
    CHECK(fn->scope_of("n") == VarScope::Local);
    CHECK(fn->scope_of("counter") == VarScope::Global);
    CHECK(fn->scope_of("helper") == VarScope::UnknownExtern);
    REQUIRE(fn->type_of("r"));
    CHECK(fn->type_of("r")->is_value());
}

TEST_CASE("notify lowers to a seven-node spine") {
    auto a = testing::analyze_fn(std::string("#define _H(__h) (*((xenevtchn_handle **)Data_custom_val(__h)))\n") + notify_src,
                                 "stub_eventchn_notify");
    REQUIRE(a->fn);
    const Cfg& cfg = a->cfg;
    CHECK(cfg.statement_node_count() == 7);
    int param = node_at_line(cfg, 4);
    int enter = node_at_line(cfg, 7);
    int call = node_at_line(cfg, 9);
    int leave = node_at_line(cfg, 11);
    int branch = node_at_line(cfg, 13);
    int fail = node_at_line(cfg, 14);
    int ret = node_at_line(cfg, 16);
    CHECK(cfg.nodes[param].kind == NodeKind::CamlParam);
    CHECK(cfg.nodes[branch].kind == NodeKind::Branch);
    CHECK(cfg.nodes[ret].kind == NodeKind::CamlReturn);
    CHECK(has_edge(cfg, cfg.entry, param));
    CHECK(has_edge(cfg, param, enter));
    CHECK(has_edge(cfg, enter, call));
    CHECK(has_edge(cfg, call, leave));
    CHECK(has_edge(cfg, leave, branch));
    CHECK(has_edge(cfg, branch, fail));
    CHECK(has_edge(cfg, branch, ret));
    CHECK(cfg.nodes[fail].noreturn);
    CHECK(cfg.nodes[fail].succs.empty());
    CHECK(cfg.nodes[ret].succs.empty());
    const Expr* e = cfg.nodes[call].expr;
    REQUIRE(e);
    std::vector<const Expr*> calls;
    collect_calls(e, calls);
    std::vector<std::string> names;
    for (const auto* c : calls) {
        names.push_back(c->callee_name());
    }
    CHECK(names == std::vector<std::string>{"Data_custom_val", "Int_val", "xenevtchn_notify"});
}

TEST_CASE("empty body connects entry to exit") {
    auto a = testing::analyze_fn("void f(void) { }\n", "f");
    REQUIRE(a->fn);
    CHECK(a->cfg.statement_node_count() == 0);
    CHECK(has_edge(a->cfg, a->cfg.entry, a->cfg.exit));
    CHECK(a->cfg.edge_count() == 1);
}

TEST_CASE("straight-line code has k nodes and k+1 edges") {
    for (int k = 1; k <= 30; ++k) {
        std::string body;
        for (int i = 0; i < k; ++i) {
            body += "  x = x + " + std::to_string(i) + ";\n";
        }
        auto a = testing::analyze_fn("void f(int x)\n{\n" + body + "}\n", "f");
        REQUIRE(a->fn);
        CAPTURE(k);
        CHECK(a->cfg.statement_node_count() == static_cast<std::size_t>(k));
        CHECK(a->cfg.edge_count() == static_cast<std::size_t>(k + 1));
    }
}

TEST_CASE("failwith does not fall through to CAMLreturn") {
    auto a = testing::analyze_fn("CAMLprim value f(value v)\n{\n  CAMLparam1(v);\n  int rc = g();\n"
                                 "  if (rc == -1) caml_failwith(\"x\");\n  CAMLreturn(Val_unit);\n}\n",
                                 "f");
    REQUIRE(a->fn);
    int fail = -1;
    int ret = -1;
    for (const auto& n : a->cfg.nodes) {
        if (n.noreturn) fail = n.id;
        if (n.kind == NodeKind::CamlReturn) ret = n.id;
    }
    REQUIRE(fail >= 0);
    REQUIRE(ret >= 0);
    CHECK_FALSE(has_edge(a->cfg, fail, ret));
    CHECK(a->cfg.nodes[fail].succs.empty());
    CHECK(a->cfg.nodes[ret].reachable);
}

TEST_CASE("loops have back-edges to the condition") {
    auto a = testing::analyze_fn("void f(int n)\n{\n  while (n > 0)\n    n--;\n}\n", "f");
    REQUIRE(a->fn);
    int cond = node_at_line(a->cfg, 3);
    int body = node_at_line(a->cfg, 4);
    CHECK(a->cfg.nodes[cond].kind == NodeKind::Branch);
    CHECK(has_edge(a->cfg, cond, body));
    CHECK(has_edge(a->cfg, body, cond));
    CHECK(has_edge(a->cfg, cond, a->cfg.exit));

    auto d = testing::analyze_fn("void f(int n)\n{\n  do {\n    n--;\n  } while (n > 0);\n}\n", "f");
    int dbody = node_at_line(d->cfg, 4);
    int dcond = node_at_line(d->cfg, 5);
    CHECK(has_edge(d->cfg, dcond, dbody));
    CHECK(has_edge(d->cfg, d->cfg.entry, dbody));

    auto fl = testing::analyze_fn("void f(int n)\n{\n  for (int i = 0; i < n; i++)\n    g(i);\n}\n", "f");
    bool back = false;
    for (const auto& node : fl->cfg.nodes) {
        for (int s : node.succs) {
            back = back || (s < node.id && fl->cfg.nodes[s].kind == NodeKind::Branch);
        }
    }
    CHECK(back);
}

TEST_CASE("both branches of an if are present") {
    auto a = testing::analyze_fn("void f(int n)\n{\n  if (n)\n    g(1);\n  else\n    g(2);\n  g(3);\n}\n", "f");
    int cond = node_at_line(a->cfg, 3);
    int t = node_at_line(a->cfg, 4);
    int e = node_at_line(a->cfg, 6);
    int join = node_at_line(a->cfg, 7);
    CHECK(has_edge(a->cfg, cond, t));
    CHECK(has_edge(a->cfg, cond, e));
    CHECK(has_edge(a->cfg, t, join));
    CHECK(has_edge(a->cfg, e, join));
}

TEST_CASE("switch lowers with fallthrough") {
    auto a = testing::analyze_fn("void f(int n)\n{\n  switch (n) {\n  case 1:\n    g(1);\n  case 2:\n    g(2);\n"
                                 "    break;\n  default:\n    g(3);\n  }\n  g(4);\n}\n",
                                 "f");
    REQUIRE(a->fn);
    int one = node_at_line(a->cfg, 5);
    int two = node_at_line(a->cfg, 7);
    int after = node_at_line(a->cfg, 12);
    CHECK(has_edge(a->cfg, one, two));
    bool two_reaches_after = false;
    for (int s : a->cfg.nodes[two].succs) {
        two_reaches_after = two_reaches_after || s == after
                            || std::find(a->cfg.nodes[s].succs.begin(), a->cfg.nodes[s].succs.end(), after)
                                   != a->cfg.nodes[s].succs.end();
    }
    CHECK(two_reaches_after);
    CHECK(a->cfg.nodes[node_at_line(a->cfg, 10)].reachable);
}

TEST_CASE("unreachable code is flagged") {
    auto a = testing::analyze_fn("int f(void)\n{\n  return 1;\n  g();\n}\n", "f");
    CHECK_FALSE(a->cfg.nodes[node_at_line(a->cfg, 4)].reachable);
}

TEST_CASE("opaque constructs and goto") {
    auto unit = parse_unit("void f(int n)\n{\n  __asm__ volatile(\"nop\");\n  goto out;\nout:\n  g();\n}\n", "t.c");
    const auto* fn = unit.find_function("f");
    REQUIRE(fn);
    CHECK_FALSE(fn->parse_failed);
    bool goto_warning = false;
    for (const auto& d : unit.diagnostics) {
        goto_warning = goto_warning || (d.rule == RuleId::UnsupportedConstruct && d.severity == Severity::Warning);
    }
    CHECK(goto_warning);
    Cfg cfg = build_cfg(*fn, Summaries::defaults());
    CHECK(cfg.nodes[node_at_line(cfg, 3)].kind == NodeKind::Opaque);
    CHECK(cfg.nodes[node_at_line(cfg, 6)].reachable);
}

TEST_CASE("unbalanced braces fail only the affected function") {
    auto unit = parse_unit("int good(void) { return 1; }\n"
                           "int bad(void) { if (x { return 2; }\n"
                           "int later(void) { return 3; }\n",
                           "t.c");
    const auto* bad = unit.find_function("bad");
    REQUIRE(bad);
    CHECK(bad->parse_failed);
    REQUIRE(unit.find_function("good"));
    CHECK_FALSE(unit.find_function("good")->parse_failed);
    bool error = false;
    for (const auto& d : unit.diagnostics) {
        error = error || (d.rule == RuleId::UnsupportedConstruct && d.severity == Severity::Error && d.loc.line == 2);
    }
    CHECK(error);

    auto open = parse_unit("int ok(void) { return 1; }\nint broken(void) { return 2;\n", "t.c");
    REQUIRE(open.find_function("ok"));
    REQUIRE(open.find_function("broken"));
    CHECK(open.find_function("broken")->parse_failed);
}

TEST_CASE("every corpus listing parses without fatal errors") {
    for (const auto& side : {"bug", "fixed"}) {
        for (const auto& dir : testing::corpus_cases(side)) {
            CAPTURE(dir.string());
            StubUnit unit = parse_unit(testing::slurp(dir / "stubs.c"), "stubs.c");
            CHECK_FALSE(unit.fatal);
            CHECK_FALSE(unit.functions.empty());
            for (const auto& fn : unit.functions) {
                CHECK_FALSE(fn.parse_failed);
            }
            for (const auto& d : unit.diagnostics) {
                CHECK(d.severity == Severity::Note);
            }
        }
    }
}

TEST_CASE("node count is linear in statement count") {
    for (int k = 1; k <= 40; k += 3) {
        std::string body;
        for (int i = 0; i < k; ++i) {
            body += "  if (x) { x = 1; } else { while (x) x--; }\n";
        }
        auto a = testing::analyze_fn("void f(int x)\n{\n" + body + "}\n", "f");
        CHECK(a->cfg.statement_node_count() <= static_cast<std::size_t>(4 * k));
        CHECK(a->cfg.nodes[a->cfg.entry].kind == NodeKind::Entry);
    }
}

}
