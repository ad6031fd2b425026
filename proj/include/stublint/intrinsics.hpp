#pragma once

#include <optional>
#include <string_view>

namespace stublint {

/// Built-in knowledge of the OCaml C interface. Names not listed are
/// ordinary calls, except that any other `caml_*` function is a runtime
/// call.
enum class IntrinsicKind {
    None,
    CamlParam,
    CamlXparam,
    CamlLocal,
    CamlReturn,
    EnterBlocking,
    LeaveBlocking,
    DataCustomVal,
    DataAbstractVal,
    FieldRead,
    FieldWrite,
    IntVal,
    ValInt,
    ValUnit,
    StringVal,
    Alloc,
    Failwith,
    RuntimeCall,
    TagConstant,
};

std::string_view to_string(IntrinsicKind kind);

/// Classifies a called name (`Field`, `caml_enter_blocking_section`, ...).
IntrinsicKind classify_call(std::string_view name);

/// Classifies an identifier used as an expression (`Val_unit`, `Tag_cons`).
IntrinsicKind classify_constant(std::string_view name);

/// Numeric value of a constant macro such as `Val_emptylist` or `Tag_cons`.
std::optional<long long> macro_constant(std::string_view name);

/// True for CAML statement macros: CAMLparamN, CAMLxparamN, CAMLlocalN,
/// CAMLreturn and friends. `count` receives N where it applies.
IntrinsicKind classify_statement_macro(std::string_view name, int& count);

/// Intrinsics that compute an address or convert a value without reading
/// the OCaml heap.
bool is_pure_conversion(IntrinsicKind kind);

} // namespace stublint
