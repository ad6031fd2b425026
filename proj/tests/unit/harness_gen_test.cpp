#include "stublint/harness_gen.hpp"
#include "stublint/header_gen.hpp"

#include <doctest.h>

#include <regex>
#include <set>

using namespace stublint;

namespace {

std::vector<ExternalDecl> decls_of(const std::string& src) {
    auto r = parse_ml_externals(src, "t.ml");
    REQUIRE(r.issues.empty());
    return r.decls;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::string nd_args(int n) {
    std::string s;
    for (int i = 0; i < n; ++i) {
        s += (i ? ", " : "") + std::string("__VERIFIER_nondet_value()");
    }
    return s;
}

} // namespace

TEST_SUITE("harness_gen") {

TEST_CASE("runtime lock model and nondet source") {
    std::string h = generate_main({});
    CHECK(contains(h, "extern value __VERIFIER_nondet_value(void);"));
    CHECK(contains(h, "__VERIFIER_ocaml_runtime_lock"));
    CHECK(contains(h, "int main(void)"));
    CHECK(contains(h, "return 0;"));
    CHECK_FALSE(contains(h, "pthread_create"));
}

TEST_CASE("three-argument primitive") {
    std::string h = generate_main(decls_of("external domain_assign_device: handle -> domid -> (int * int * int * int) -> unit\n"
                                           "  = \"stub_xc_domain_assign_device\"\n"));
    CHECK(contains(h, "stub_xc_domain_assign_device(" + nd_args(3) + ")"));
    CHECK(contains(h, "pthread_mutex_lock(&__VERIFIER_ocaml_runtime_lock);"));
    CHECK(contains(h, "pthread_mutex_unlock(&__VERIFIER_ocaml_runtime_lock);"));
    CHECK(contains(h, "pthread_create("));
}

TEST_CASE("argv form for bytecode above five arguments") {
    std::string h = generate_main(decls_of("external add_nat: nat -> int -> int -> nat -> int -> int -> int -> int\n"
                                           "                = \"add_nat_bytecode\" \"add_nat_native\"\n"));
    CHECK(contains(h, "add_nat_bytecode(argv, 7)"));
    CHECK(contains(h, "value argv[7]"));
    CHECK(contains(h, "add_nat_native(" + nd_args(7) + ")"));
}

TEST_CASE("unboxed native arguments use typed nondet sources") {
    std::string h = generate_main(decls_of("external f: float -> int64 -> float = \"f_b\" \"f_n\" [@@unboxed]\n"));
    CHECK(contains(h, "f_n(__VERIFIER_nondet_double(), __VERIFIER_nondet_int64())"));
    CHECK(contains(h, "f_b(" + nd_args(2) + ")"));
}

TEST_CASE("lock is taken before and released after each call") {
    std::string h = generate_main(decls_of("external a : int -> int = \"stub_a\"\n"));
    auto lock = h.find("pthread_mutex_lock(&__VERIFIER_ocaml_runtime_lock)");
    auto call = h.find("(void)stub_a(");
    auto unlock = h.find("pthread_mutex_unlock(&__VERIFIER_ocaml_runtime_lock)");
    REQUIRE(lock != std::string::npos);
    CHECK(lock < call);
    CHECK(call < unlock);
}

TEST_CASE("deterministic and ordered") {
    auto d = decls_of("external b : int -> int = \"stub_b\"\nexternal a : int -> int = \"stub_a\"\n");
    CHECK(generate_main(d) == generate_main(d));
    CHECK(generate_main(d).find("stub_b(") < generate_main(d).find("stub_a("));
}

TEST_CASE("every called stub has a prototype in the generated header") {
    auto d = decls_of("external a : int -> int = \"stub_a\"\n"
                      "external add_nat: nat -> int -> int -> nat -> int -> int -> int -> int\n"
                      "                = \"add_nat_bytecode\" \"add_nat_native\"\n"
                      "external f: float -> float = \"f_b\" \"f_n\" [@@unboxed]\n"
                      "external id : 'a -> 'a = \"%identity\"\n");
    std::string header = render_header(d);
    std::string harness = generate_main(d);
    std::regex call(R"(\(void\)([A-Za-z_][A-Za-z0-9_]*)\()");
    std::set<std::string> called;
    for (auto it = std::sregex_iterator(harness.begin(), harness.end(), call); it != std::sregex_iterator(); ++it) {
        called.insert((*it)[1]);
    }
    CHECK(called == std::set<std::string>{"stub_a", "add_nat_bytecode", "add_nat_native", "f_b", "f_n"});
    for (const auto& name : called) {
        CAPTURE(name);
        CHECK(contains(header, " " + name + "("));
    }
}

}
