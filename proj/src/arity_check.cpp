#include "stublint/arity_check.hpp"

#include "stublint/header_gen.hpp"

namespace stublint {

namespace {

std::string plural(std::size_t n, const char* word) {
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

bool is_argv_pair(const StubFunction& fn) {
    return fn.params.size() == 2 && fn.params[0].type.is_value_pointer()
           && fn.params[1].type.kind == CType::Kind::Integer;
}

void check_one(const ExternalDecl& decl, const std::string& symbol, StubFlavor flavor,
               const std::vector<const StubUnit*>& units, std::vector<Diagnostic>& out) {
    const StubFunction* fn = nullptr;
    const StubUnit* owner = nullptr;
    for (const StubUnit* u : units) {
        if (const StubFunction* f = u->find_function(symbol)) {
            fn = f;
            owner = u;
            break;
        }
    }
    if (fn == nullptr) {
        out.push_back(make_diag(RuleId::Note, Severity::Note, decl.loc,
                                "no definition of '" + symbol + "' in the analyzed C files"));
        return;
    }
    SourceLoc at{owner->file, fn->line, fn->column};
    std::size_t n = fn->params.size();
    auto report = [&](RuleId rule, std::string msg) {
        Diagnostic d = make_diag(rule, Severity::Error, at, std::move(msg));
        d.related = decl.loc;
        out.push_back(std::move(d));
    };

    if (flavor == StubFlavor::Bytecode && decl.arity > max_direct_args) {
        if (!is_argv_pair(*fn)) {
            report(RuleId::ArityMismatch,
                   "'" + symbol + "' is the bytecode stub of '" + decl.ocaml_name + "' with "
                       + plural(static_cast<std::size_t>(decl.arity), "argument")
                       + " and must take (value *argv, int argn)");
        }
        return;
    }
    if (n == static_cast<std::size_t>(decl.arity)) {
        return;
    }
    if (n == 0 && decl.arity == 1) {
        report(RuleId::VoidStub, "'" + symbol + "' takes no parameters but external '" + decl.ocaml_name
                                     + "' always passes one argument");
        return;
    }
    report(RuleId::ArityMismatch, "'" + symbol + "' takes " + plural(n, "parameter") + " but external '"
                                      + decl.ocaml_name + "' declares "
                                      + plural(static_cast<std::size_t>(decl.arity), "argument"));
}

} // namespace

std::vector<Diagnostic> check_arity(const std::vector<ExternalDecl>& decls,
                                    const std::vector<const StubUnit*>& units) {
    std::vector<Diagnostic> out;
    for (const auto& decl : decls) {
        if (decl.is_compiler_primitive()) {
            continue;
        }
        check_one(decl, decl.byte_name, StubFlavor::Bytecode, units, out);
        if (decl.native_name && *decl.native_name != decl.byte_name) {
            check_one(decl, *decl.native_name, StubFlavor::Native, units, out);
        }
    }
    return out;
}

std::vector<Diagnostic> check_arity(const std::vector<ExternalDecl>& decls, const StubUnit& unit) {
    return check_arity(decls, std::vector<const StubUnit*>{&unit});
}

} // namespace stublint
