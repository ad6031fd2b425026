#include "stublint/harness_gen.hpp"

#include "stublint/header_gen.hpp"

namespace stublint {

namespace {

constexpr std::string_view indent = "        ";

std::string_view nondet_source(CParamType type) {
    switch (type) {
        case CParamType::CDouble: return "__VERIFIER_nondet_double()";
        case CParamType::CInt32: return "__VERIFIER_nondet_int32()";
        case CParamType::CInt64: return "__VERIFIER_nondet_int64()";
        case CParamType::CIntnat: return "__VERIFIER_nondet_intnat()";
        default: return "__VERIFIER_nondet_value()";
    }
}

void emit_call(std::string& out, const CPrototype& proto) {
    out += indent;
    out += "(void)";
    out += proto.c_name;
    out += '(';
    for (std::size_t i = 0; i < proto.params.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += nondet_source(proto.params[i]);
    }
    out += ");\n";
}

void emit_argv_call(std::string& out, const CPrototype& proto, int arity) {
    std::string n = std::to_string(arity);
    out += indent;
    out += "{\n";
    out += indent;
    out += indent;
    out += "value argv[" + n + "] = {";
    for (int i = 0; i < arity; ++i) {
        out += i == 0 ? " " : ", ";
        out += "__VERIFIER_nondet_value()";
    }
    out += " };\n";
    out += indent;
    out += indent;
    out += "(void)" + proto.c_name + "(argv, " + n + ");\n";
    out += indent;
    out += "}\n";
}

std::string thread_name(const ExternalDecl& decl) {
    return "__stublint_thread_" + decl.byte_name;
}

} // namespace

std::string generate_main(const std::vector<ExternalDecl>& decls) {
    std::vector<const ExternalDecl*> prims;
    for (const auto& d : decls) {
        if (!d.is_compiler_primitive()) {
            prims.push_back(&d);
        }
    }

    std::string out;
    out += "/* AUTOGENERATED FILE, DO NOT EDIT */\n";
    out += "#include <pthread.h>\n";
    out += "#include <stdint.h>\n";
    out += "#include <caml/mlvalues.h>\n";
    out += "\n";
    out += "extern value __VERIFIER_nondet_value(void);\n";
    out += "extern double __VERIFIER_nondet_double(void);\n";
    out += "extern int32_t __VERIFIER_nondet_int32(void);\n";
    out += "extern int64_t __VERIFIER_nondet_int64(void);\n";
    out += "extern intnat __VERIFIER_nondet_intnat(void);\n";
    out += "\n";
    out += "pthread_mutex_t __VERIFIER_ocaml_runtime_lock = PTHREAD_MUTEX_INITIALIZER;\n";

    for (const ExternalDecl* d : prims) {
        out += "\n";
        out += "static void *" + thread_name(*d) + "(void *arg)\n";
        out += "{\n";
        out += indent;
        out += "(void)arg;\n";
        out += indent;
        out += "pthread_mutex_lock(&__VERIFIER_ocaml_runtime_lock);\n";
        for (const auto& proto : prototypes_for(*d).prototypes) {
            if (!proto.params.empty() && proto.params[0] == CParamType::ArgvBlock) {
                emit_argv_call(out, proto, d->arity);
            } else {
                emit_call(out, proto);
            }
        }
        out += indent;
        out += "pthread_mutex_unlock(&__VERIFIER_ocaml_runtime_lock);\n";
        out += indent;
        out += "return NULL;\n";
        out += "}\n";
    }

    out += "\n";
    out += "int main(void)\n";
    out += "{\n";
    if (!prims.empty()) {
        std::string n = std::to_string(prims.size());
        out += indent;
        out += "pthread_t threads[" + n + "];\n";
        for (std::size_t i = 0; i < prims.size(); ++i) {
            out += indent;
            out += "pthread_create(&threads[" + std::to_string(i) + "], NULL, "
                 + thread_name(*prims[i]) + ", NULL);\n";
        }
        for (std::size_t i = 0; i < prims.size(); ++i) {
            out += indent;
            out += "pthread_join(threads[" + std::to_string(i) + "], NULL);\n";
        }
    }
    out += indent;
    out += "return 0;\n";
    out += "}\n";
    return out;
}

} // namespace stublint
