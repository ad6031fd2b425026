#include "stublint/c_ast.hpp"

namespace stublint {

CType CType::value() {
    CType t;
    t.kind = Kind::CamlValue;
    t.name = "value";
    return t;
}

CType CType::pointer_to(const CType& target) {
    CType t;
    t.kind = Kind::Pointer;
    t.pointee = std::make_shared<const CType>(target);
    return t;
}

CType CType::integer(std::string name, int width) {
    CType t;
    t.kind = Kind::Integer;
    t.name = std::move(name);
    t.width = width;
    return t;
}

CType CType::floating(std::string name) {
    CType t;
    t.kind = Kind::Floating;
    t.name = std::move(name);
    return t;
}

CType CType::record(std::string name) {
    CType t;
    t.kind = Kind::Record;
    t.name = std::move(name);
    return t;
}

CType CType::unknown(std::string name) {
    CType t;
    t.kind = Kind::Unknown;
    t.name = std::move(name);
    return t;
}

std::string CType::spelling() const {
    switch (kind) {
        case Kind::CamlValue: return "value";
        case Kind::Pointer: {
            std::string inner = pointee ? pointee->spelling() : std::string("void");
            return inner + (inner.back() == '*' ? "*" : " *");
        }
        case Kind::Record: return "struct " + name;
        default: return name;
    }
}

std::string Expr::callee_name() const {
    if (kind == ExprKind::Call && !kids.empty() && kids[0]->kind == ExprKind::Ident) {
        return kids[0]->text;
    }
    return {};
}

std::string Expr::sketch() const {
    auto k = [&](std::size_t i) { return kids.size() > i ? kids[i]->sketch() : std::string(); };
    switch (kind) {
        case ExprKind::Ident:
        case ExprKind::IntLit:
        case ExprKind::FloatLit:
        case ExprKind::StrLit:
        case ExprKind::CharLit:
            return text;
        case ExprKind::Call: {
            std::string s = k(0) + "(";
            for (std::size_t i = 1; i < kids.size(); ++i) {
                s += (i > 1 ? ", " : "") + k(i);
            }
            return s + ")";
        }
        case ExprKind::Unary: return text + k(0);
        case ExprKind::Postfix: return k(0) + text;
        case ExprKind::Binary: return k(0) + " " + text + " " + k(1);
        case ExprKind::Assign: return k(0) + " " + text + " " + k(1);
        case ExprKind::Cast: return "(" + type.spelling() + ")" + k(0);
        case ExprKind::Member: return k(0) + (arrow ? "->" : ".") + text;
        case ExprKind::Index: return k(0) + "[" + k(1) + "]";
        case ExprKind::Ternary: return k(0) + " ? " + k(1) + " : " + k(2);
        case ExprKind::SizeofType: return "sizeof(" + type.spelling() + ")";
        case ExprKind::SizeofExpr: return "sizeof " + k(0);
        case ExprKind::InitList: return "{...}";
        case ExprKind::CompoundLit: return "(" + type.spelling() + "){...}";
        case ExprKind::Opaque: return text.empty() ? "<opaque>" : text;
    }
    return {};
}

VarScope StubFunction::scope_of(const std::string& var) const {
    for (const auto& v : locals) {
        if (v.name == var) {
            return VarScope::Local;
        }
    }
    for (const auto& v : params) {
        if (v.name == var) {
            return VarScope::Param;
        }
    }
    for (const auto& v : globals) {
        if (v.name == var) {
            return VarScope::Global;
        }
    }
    return VarScope::UnknownExtern;
}

const CType* StubFunction::type_of(const std::string& var) const {
    for (const auto& v : locals) {
        if (v.name == var) {
            return &v.type;
        }
    }
    for (const auto& v : params) {
        if (v.name == var) {
            return &v.type;
        }
    }
    for (const auto& v : globals) {
        if (v.name == var) {
            return &v.type;
        }
    }
    return nullptr;
}

std::size_t StubFunction::value_param_count() const {
    std::size_t n = 0;
    for (const auto& p : params) {
        if (p.type.is_value()) {
            ++n;
        }
    }
    return n;
}

const StubFunction* StubUnit::find_function(const std::string& name) const {
    for (const auto& f : functions) {
        if (f.name == name) {
            return &f;
        }
    }
    return nullptr;
}

} // namespace stublint
