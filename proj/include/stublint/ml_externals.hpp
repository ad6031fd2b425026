//===- ml_externals.hpp -----------------------------------------------===//
//
//  Extraction of `external` primitive declarations from OCaml source.
//
//  This is a focused scanner: it tokenizes OCaml (comments, string and
//  quoted-string literals, char literals vs type variables) and then
//  recognizes `external name : type = "c_name" ["c_native"] attrs` items
//  anywhere in the file, including inside nested modules and signatures.
//
//===------------------------------------------------------------------===//

#pragma once

#include "stublint/diagnostic.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stublint {

enum class ArgKind {
    BoxedValue,
    UnboxedFloat,
    UnboxedInt32,
    UnboxedInt64,
    UnboxedNativeint,
    UntaggedInt,
};

std::string_view to_string(ArgKind kind);

enum class ExternalAttr { Unboxed, Untagged, Noalloc };

struct ExternalDecl {
    std::string ocaml_name;
    std::string byte_name;
    std::optional<std::string> native_name;
    int arity = 0;
    std::vector<ArgKind> arg_kinds;
    ArgKind return_kind = ArgKind::BoxedValue;
    std::set<ExternalAttr> attrs;
    SourceLoc loc;

    /// `%`-prefixed names are compiler intrinsics, not C symbols.
    bool is_compiler_primitive() const {
        return !byte_name.empty() && byte_name.front() == '%';
    }

    bool operator==(const ExternalDecl&) const = default;
};

struct MlParseIssue {
    SourceLoc loc;
    std::string message;

    bool operator==(const MlParseIssue&) const = default;
};

struct MlParseResult {
    std::vector<ExternalDecl> decls;
    std::vector<MlParseIssue> issues;
};

class MlSyntaxError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every `external` declaration in source order. Malformed declarations
/// are reported in `issues` and skipped; the rest are still returned.
MlParseResult parse_ml_externals(std::string_view source_text,
                                 std::string_view file_name);

/// Number of top-level `->` in an external's type expression. Arrows
/// nested in parentheses or brackets do not count.
/// Throws MlSyntaxError on unbalanced parentheses.
int compute_arity(std::string_view type_expr);

} // namespace stublint
