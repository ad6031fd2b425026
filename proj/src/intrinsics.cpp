#include "stublint/intrinsics.hpp"

#include <map>
#include <string>

namespace stublint {

namespace {

const std::map<std::string, IntrinsicKind, std::less<>>& call_table() {
    static const std::map<std::string, IntrinsicKind, std::less<>> table{
        {"caml_enter_blocking_section", IntrinsicKind::EnterBlocking},
        {"caml_release_runtime_system", IntrinsicKind::EnterBlocking},
        {"caml_leave_blocking_section", IntrinsicKind::LeaveBlocking},
        {"caml_acquire_runtime_system", IntrinsicKind::LeaveBlocking},
        {"Data_custom_val", IntrinsicKind::DataCustomVal},
        {"Data_abstract_val", IntrinsicKind::DataAbstractVal},
        {"Field", IntrinsicKind::FieldRead},
        {"Double_val", IntrinsicKind::FieldRead},
        {"Int32_val", IntrinsicKind::FieldRead},
        {"Int64_val", IntrinsicKind::FieldRead},
        {"Nativeint_val", IntrinsicKind::FieldRead},
        {"Tag_val", IntrinsicKind::FieldRead},
        {"Wosize_val", IntrinsicKind::FieldRead},
        {"Some_val", IntrinsicKind::FieldRead},
        {"Byte", IntrinsicKind::FieldRead},
        {"Byte_u", IntrinsicKind::FieldRead},
        {"Double_field", IntrinsicKind::FieldRead},
        {"Double_flat_field", IntrinsicKind::FieldRead},
        {"Op_val", IntrinsicKind::FieldRead},
        {"Hd_val", IntrinsicKind::FieldRead},
        {"Store_field", IntrinsicKind::FieldWrite},
        {"Store_double_field", IntrinsicKind::FieldWrite},
        {"Store_double_val", IntrinsicKind::FieldWrite},
        {"Int_val", IntrinsicKind::IntVal},
        {"Long_val", IntrinsicKind::IntVal},
        {"Bool_val", IntrinsicKind::IntVal},
        {"Unsigned_int_val", IntrinsicKind::IntVal},
        {"Unsigned_long_val", IntrinsicKind::IntVal},
        {"Is_block", IntrinsicKind::IntVal},
        {"Is_long", IntrinsicKind::IntVal},
        {"Val_int", IntrinsicKind::ValInt},
        {"Val_long", IntrinsicKind::ValInt},
        {"Val_bool", IntrinsicKind::ValInt},
        {"String_val", IntrinsicKind::StringVal},
        {"Bytes_val", IntrinsicKind::StringVal},
        {"Bp_val", IntrinsicKind::StringVal},
        {"caml_failwith", IntrinsicKind::Failwith},
        {"caml_invalid_argument", IntrinsicKind::Failwith},
        {"caml_raise", IntrinsicKind::Failwith},
        {"caml_raise_constant", IntrinsicKind::Failwith},
        {"caml_raise_with_arg", IntrinsicKind::Failwith},
        {"caml_raise_with_string", IntrinsicKind::Failwith},
        {"caml_raise_not_found", IntrinsicKind::Failwith},
        {"caml_raise_out_of_memory", IntrinsicKind::Failwith},
        {"caml_raise_end_of_file", IntrinsicKind::Failwith},
        {"caml_raise_zero_divide", IntrinsicKind::Failwith},
        {"caml_raise_sys_error", IntrinsicKind::Failwith},
        {"caml_array_bound_error", IntrinsicKind::Failwith},
    };
    return table;
}

const std::map<std::string, long long, std::less<>>& constant_table() {
    static const std::map<std::string, long long, std::less<>> table{
        {"Val_unit", 1},
        {"Val_false", 1},
        {"Val_true", 3},
        {"Val_emptylist", 1},
        {"Val_none", 1},
        {"Val_int0", 1},
        {"NULL", 0},
        {"Tag_cons", 0},
        {"Tag_some", 0},
        {"Lazy_tag", 246},
        {"Closure_tag", 247},
        {"Object_tag", 248},
        {"Infix_tag", 249},
        {"Forward_tag", 250},
        {"No_scan_tag", 251},
        {"Abstract_tag", 251},
        {"String_tag", 252},
        {"Double_tag", 253},
        {"Double_array_tag", 254},
        {"Custom_tag", 255},
    };
    return table;
}

bool starts_with(std::string_view s, std::string_view p) {
    return s.substr(0, p.size()) == p;
}

} // namespace

std::string_view to_string(IntrinsicKind kind) {
    switch (kind) {
        case IntrinsicKind::None: return "none";
        case IntrinsicKind::CamlParam: return "camlparam";
        case IntrinsicKind::CamlXparam: return "camlxparam";
        case IntrinsicKind::CamlLocal: return "camllocal";
        case IntrinsicKind::CamlReturn: return "camlreturn";
        case IntrinsicKind::EnterBlocking: return "enter_blocking";
        case IntrinsicKind::LeaveBlocking: return "leave_blocking";
        case IntrinsicKind::DataCustomVal: return "data_custom_val";
        case IntrinsicKind::DataAbstractVal: return "data_abstract_val";
        case IntrinsicKind::FieldRead: return "field_read";
        case IntrinsicKind::FieldWrite: return "field_write";
        case IntrinsicKind::IntVal: return "int_val";
        case IntrinsicKind::ValInt: return "val_int";
        case IntrinsicKind::ValUnit: return "val_unit";
        case IntrinsicKind::StringVal: return "string_val";
        case IntrinsicKind::Alloc: return "alloc";
        case IntrinsicKind::Failwith: return "failwith";
        case IntrinsicKind::RuntimeCall: return "runtime_call";
        case IntrinsicKind::TagConstant: return "tag_constant";
    }
    return "none";
}

IntrinsicKind classify_call(std::string_view name) {
    const auto& table = call_table();
    if (auto it = table.find(name); it != table.end()) {
        return it->second;
    }
    if (starts_with(name, "caml_alloc") || starts_with(name, "caml_copy_")) {
        return IntrinsicKind::Alloc;
    }
    if (starts_with(name, "caml_raise")) {
        return IntrinsicKind::Failwith;
    }
    if (starts_with(name, "caml_")) {
        return IntrinsicKind::RuntimeCall;
    }
    return IntrinsicKind::None;
}

IntrinsicKind classify_constant(std::string_view name) {
    if (name == "Val_unit" || name == "Val_false" || name == "Val_true" || name == "Val_emptylist"
        || name == "Val_none") {
        return IntrinsicKind::ValUnit;
    }
    if (name != "NULL" && constant_table().count(name) != 0) {
        return IntrinsicKind::TagConstant;
    }
    return IntrinsicKind::None;
}

std::optional<long long> macro_constant(std::string_view name) {
    const auto& table = constant_table();
    if (auto it = table.find(name); it != table.end()) {
        return it->second;
    }
    return std::nullopt;
}

IntrinsicKind classify_statement_macro(std::string_view name, int& count) {
    auto numbered = [&](std::string_view prefix) {
        if (!starts_with(name, prefix) || name.size() != prefix.size() + 1) {
            return false;
        }
        char d = name.back();
        if (d < '0' || d > '5') {
            return false;
        }
        count = d - '0';
        return true;
    };
    if (numbered("CAMLparam")) {
        return IntrinsicKind::CamlParam;
    }
    if (numbered("CAMLxparam") && count > 0) {
        return IntrinsicKind::CamlXparam;
    }
    if (numbered("CAMLlocal") && count > 0) {
        return IntrinsicKind::CamlLocal;
    }
    if (name == "CAMLlocalN") {
        count = 1;
        return IntrinsicKind::CamlLocal;
    }
    if (name == "CAMLxparamN") {
        count = 1;
        return IntrinsicKind::CamlXparam;
    }
    if (name == "CAMLreturn" || name == "CAMLreturn0" || name == "CAMLreturnT") {
        count = 0;
        return IntrinsicKind::CamlReturn;
    }
    return IntrinsicKind::None;
}

bool is_pure_conversion(IntrinsicKind kind) {
    switch (kind) {
        case IntrinsicKind::DataCustomVal:
        case IntrinsicKind::DataAbstractVal:
        case IntrinsicKind::IntVal:
        case IntrinsicKind::ValInt:
        case IntrinsicKind::ValUnit:
        case IntrinsicKind::TagConstant:
            return true;
        default:
            return false;
    }
}

} // namespace stublint
