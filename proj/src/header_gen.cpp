#include "stublint/header_gen.hpp"

namespace stublint {

std::string_view c_spelling(CParamType type) {
    switch (type) {
        case CParamType::CamlValue: return "value";
        case CParamType::CDouble: return "double";
        case CParamType::CInt32: return "int32_t";
        case CParamType::CInt64: return "int64_t";
        case CParamType::CIntnat: return "intnat";
        case CParamType::CInt: return "int";
        case CParamType::ArgvBlock: return "value *";
    }
    return "value";
}

CParamType param_type_for(ArgKind kind) {
    switch (kind) {
        case ArgKind::BoxedValue: return CParamType::CamlValue;
        case ArgKind::UnboxedFloat: return CParamType::CDouble;
        case ArgKind::UnboxedInt32: return CParamType::CInt32;
        case ArgKind::UnboxedInt64: return CParamType::CInt64;
        case ArgKind::UnboxedNativeint: return CParamType::CIntnat;
        case ArgKind::UntaggedInt: return CParamType::CIntnat;
    }
    return CParamType::CamlValue;
}

namespace {

CPrototype bytecode_prototype(const std::string& name, int arity) {
    CPrototype p;
    p.c_name = name;
    p.flavor = StubFlavor::Bytecode;
    if (arity > max_direct_args) {
        p.params = {CParamType::ArgvBlock, CParamType::CInt};
    } else {
        p.params.assign(static_cast<std::size_t>(arity), CParamType::CamlValue);
    }
    return p;
}

} // namespace

PrototypeSet prototypes_for(const ExternalDecl& decl) {
    PrototypeSet out;
    if (decl.is_compiler_primitive()) {
        return out;
    }
    out.prototypes.push_back(bytecode_prototype(decl.byte_name, decl.arity));
    if (decl.native_name) {
        CPrototype native;
        native.c_name = *decl.native_name;
        native.flavor = StubFlavor::Native;
        for (ArgKind k : decl.arg_kinds) {
            native.params.push_back(param_type_for(k));
        }
        native.returns = param_type_for(decl.return_kind);
        out.prototypes.push_back(std::move(native));
    } else if (decl.arity > max_direct_args) {
        out.diagnostics.push_back(make_diag(
            RuleId::ArityMismatch, Severity::Error, decl.loc,
            "external '" + decl.ocaml_name + "' takes " + std::to_string(decl.arity)
                + " arguments but names only one C stub; above "
                + std::to_string(max_direct_args)
                + " arguments separate bytecode and native stubs are required"));
    }
    return out;
}

std::string render_prototype(const CPrototype& proto) {
    std::string line = "CAMLprim ";
    line += c_spelling(proto.returns);
    line += ' ';
    line += proto.c_name;
    line += '(';
    bool argv_form = proto.params.size() == 2 && proto.params[0] == CParamType::ArgvBlock;
    for (std::size_t i = 0; i < proto.params.size(); ++i) {
        if (i > 0) {
            line += ", ";
        }
        line += c_spelling(proto.params[i]);
        if (argv_form) {
            line += i == 0 ? "argv" : " argn";
        }
    }
    line += ");";
    return line;
}

std::string_view header_preamble() {
    return "/* AUTOGENERATED FILE, DO NOT EDIT */\n"
           "#define CAML_NAME_SPACE\n"
           "#define _GNU_SOURCE\n"
           "#define _XOPEN_SOURCE 600\n"
           "#include <caml/mlvalues.h>\n";
}

std::string render_header(const std::vector<ExternalDecl>& decls) {
    std::string out(header_preamble());
    for (const auto& decl : decls) {
        for (const auto& proto : prototypes_for(decl).prototypes) {
            out += render_prototype(proto);
            out += '\n';
        }
    }
    return out;
}

} // namespace stublint
