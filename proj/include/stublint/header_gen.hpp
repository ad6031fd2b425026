//===- header_gen.hpp -------------------------------------------------===//
//
//  C prototypes for OCaml external primitives. The generated header lets a
//  C compiler check stub arity and unboxed parameter types.
//
//===------------------------------------------------------------------===//

#pragma once

#include "stublint/diagnostic.hpp"
#include "stublint/ml_externals.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace stublint {

/// Bytecode stubs take at most this many arguments directly; above it they
/// receive an argv block instead.
inline constexpr int max_direct_args = 5;

enum class CParamType { CamlValue, CDouble, CInt32, CInt64, CIntnat, CInt, ArgvBlock };

enum class StubFlavor { Native, Bytecode };

struct CPrototype {
    std::string c_name;
    std::vector<CParamType> params;
    CParamType returns = CParamType::CamlValue;
    StubFlavor flavor = StubFlavor::Bytecode;

    bool operator==(const CPrototype&) const = default;
};

struct PrototypeSet {
    std::vector<CPrototype> prototypes;
    std::vector<Diagnostic> diagnostics;
};

/// C spelling of a parameter or return type. This table is the only place
/// the spellings live.
std::string_view c_spelling(CParamType type);

CParamType param_type_for(ArgKind kind);

PrototypeSet prototypes_for(const ExternalDecl& decl);

/// `CAMLprim value name(value, value);`
std::string render_prototype(const CPrototype& proto);

/// The five preamble lines, newline-terminated.
std::string_view header_preamble();

/// Preamble followed by one prototype line per generated prototype, in input
/// order. `%` compiler primitives are skipped.
std::string render_header(const std::vector<ExternalDecl>& decls);

} // namespace stublint
