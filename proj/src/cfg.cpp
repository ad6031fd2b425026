#include "stublint/cfg.hpp"

#include <algorithm>
#include <map>

namespace stublint {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Entry: return "entry";
        case NodeKind::Exit: return "exit";
        case NodeKind::Expr: return "expr";
        case NodeKind::Decl: return "decl";
        case NodeKind::Branch: return "branch";
        case NodeKind::Return: return "return";
        case NodeKind::CamlParam: return "camlparam";
        case NodeKind::CamlLocal: return "camllocal";
        case NodeKind::CamlReturn: return "camlreturn";
        case NodeKind::Opaque: return "opaque";
        case NodeKind::Goto: return "goto";
        case NodeKind::Label: return "label";
    }
    return "?";
}

std::size_t Cfg::edge_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) {
        n += node.succs.size();
    }
    return n;
}

void collect_calls(const Expr* e, std::vector<const Expr*>& out) {
    if (e == nullptr) {
        return;
    }
    switch (e->kind) {
        case ExprKind::SizeofType:
        case ExprKind::SizeofExpr:
            return;
        case ExprKind::Assign:
            collect_calls(e->kid(1), out);
            collect_calls(e->kid(0), out);
            return;
        case ExprKind::Call:
            for (std::size_t i = 1; i < e->kids.size(); ++i) {
                collect_calls(e->kid(i), out);
            }
            collect_calls(e->kid(0), out);
            out.push_back(e);
            return;
        default:
            for (const auto& k : e->kids) {
                collect_calls(k.get(), out);
            }
    }
}

namespace {

using Preds = std::vector<int>;

class Builder {
public:
    Builder(const StubFunction& fn, const Summaries& summaries) : summaries_(summaries) {
        cfg_.fn = &fn;
        cfg_.returns_to_ocaml = fn.is_camlprim;
        add_node(NodeKind::Entry, nullptr, fn.line, fn.column);
        add_node(NodeKind::Exit, nullptr, fn.line, fn.column);
    }

    Cfg build(const Stmt* body) {
        Preds out{cfg_.entry};
        if (body != nullptr) {
            out = lower(*body, out);
        }
        link(out, cfg_.exit);
        for (const auto& [node, label] : gotos_) {
            auto it = labels_.find(label);
            if (it != labels_.end()) {
                edge(node, it->second);
            }
        }
        mark_reachable();
        return std::move(cfg_);
    }

private:
    const Summaries& summaries_;
    Cfg cfg_;
    std::vector<Preds*> break_targets_;
    std::vector<int> continue_targets_;
    std::map<std::string, int> labels_;
    std::vector<std::pair<int, std::string>> gotos_;

    int add_node(NodeKind kind, const Stmt* s, int line, int column) {
        CfgNode n;
        n.id = static_cast<int>(cfg_.nodes.size());
        n.kind = kind;
        n.stmt = s;
        n.line = line;
        n.column = column;
        cfg_.nodes.push_back(std::move(n));
        return cfg_.nodes.back().id;
    }

    int add_stmt_node(NodeKind kind, const Stmt& s, const Expr* e) {
        int id = add_node(kind, &s, s.line, s.column);
        cfg_.nodes[id].expr = e;
        return id;
    }

    void edge(int from, int to) {
        auto& succs = cfg_.nodes[from].succs;
        if (std::find(succs.begin(), succs.end(), to) == succs.end()) {
            succs.push_back(to);
            cfg_.nodes[to].preds.push_back(from);
        }
    }

    void link(const Preds& preds, int to) {
        for (int p : preds) {
            edge(p, to);
        }
    }

    bool calls_noreturn(const Expr* e) const {
        std::vector<const Expr*> calls;
        collect_calls(e, calls);
        for (const Expr* c : calls) {
            std::string name = c->callee_name();
            if (!name.empty() && summaries_.has(name, Effect::Noreturn)) {
                return true;
            }
        }
        return false;
    }

    /// Ends the path at `id` when it cannot fall through.
    Preds finish(int id) {
        CfgNode& n = cfg_.nodes[id];
        if (n.kind == NodeKind::Return || n.kind == NodeKind::CamlReturn) {
            cfg_.exits.push_back(id);
            return {};
        }
        if (calls_noreturn(n.expr)) {
            n.noreturn = true;
            cfg_.exits.push_back(id);
            return {};
        }
        return {id};
    }

    Preds simple(NodeKind kind, const Stmt& s, const Expr* e, const Preds& preds) {
        int id = add_stmt_node(kind, s, e);
        link(preds, id);
        return finish(id);
    }

    Preds lower(const Stmt& s, Preds preds) {
        switch (s.kind) {
            case StmtKind::Compound:
                for (const auto& c : s.children) {
                    preds = lower(*c, preds);
                }
                return preds;
            case StmtKind::Decl:
                for (const auto& d : s.decls) {
                    if (!d.init) {
                        continue;
                    }
                    int id = add_node(NodeKind::Decl, &s, d.line, d.column);
                    cfg_.nodes[id].decl = &d;
                    cfg_.nodes[id].expr = d.init.get();
                    link(preds, id);
                    preds = finish(id);
                }
                return preds;
            case StmtKind::Expr:
                return simple(NodeKind::Expr, s, s.expr.get(), preds);
            case StmtKind::Opaque:
                return simple(NodeKind::Opaque, s, s.expr.get(), preds);
            case StmtKind::CamlParam:
                return simple(NodeKind::CamlParam, s, nullptr, preds);
            case StmtKind::CamlLocal:
                return simple(NodeKind::CamlLocal, s, nullptr, preds);
            case StmtKind::CamlReturn:
                return simple(NodeKind::CamlReturn, s, s.expr.get(), preds);
            case StmtKind::Return:
                return simple(NodeKind::Return, s, s.expr.get(), preds);
            case StmtKind::If: {
                int b = add_stmt_node(NodeKind::Branch, s, s.expr.get());
                link(preds, b);
                Preds head = finish(b);
                Preds out = lower(*s.body, head);
                if (s.else_body) {
                    Preds e = lower(*s.else_body, head);
                    out.insert(out.end(), e.begin(), e.end());
                } else {
                    out.insert(out.end(), head.begin(), head.end());
                }
                return out;
            }
            case StmtKind::While: {
                int c = add_stmt_node(NodeKind::Branch, s, s.expr.get());
                link(preds, c);
                Preds head = finish(c);
                Preds breaks;
                break_targets_.push_back(&breaks);
                continue_targets_.push_back(c);
                Preds body = lower(*s.body, head);
                break_targets_.pop_back();
                continue_targets_.pop_back();
                link(body, c);
                head.insert(head.end(), breaks.begin(), breaks.end());
                return head;
            }
            case StmtKind::DoWhile: {
                int c = add_stmt_node(NodeKind::Branch, s, s.expr.get());
                if (s.expr) {
                    cfg_.nodes[c].line = s.expr->line;
                    cfg_.nodes[c].column = s.expr->column;
                }
                std::size_t first = cfg_.nodes.size();
                Preds breaks;
                break_targets_.push_back(&breaks);
                continue_targets_.push_back(c);
                Preds body = lower(*s.body, preds);
                break_targets_.pop_back();
                continue_targets_.pop_back();
                link(body, c);
                if (cfg_.nodes.size() > first) {
                    edge(c, static_cast<int>(first));
                } else {
                    link(preds, c);
                    edge(c, c);
                }
                Preds out = finish(c);
                out.insert(out.end(), breaks.begin(), breaks.end());
                return out;
            }
            case StmtKind::For: {
                if (s.init) {
                    preds = lower(*s.init, preds);
                }
                int c = add_stmt_node(NodeKind::Branch, s, s.expr.get());
                link(preds, c);
                int step = -1;
                if (s.step) {
                    step = add_stmt_node(NodeKind::Expr, s, s.step.get());
                    cfg_.nodes[step].line = s.step->line;
                    cfg_.nodes[step].column = s.step->column;
                    edge(step, c);
                }
                Preds head = finish(c);
                Preds breaks;
                break_targets_.push_back(&breaks);
                continue_targets_.push_back(step >= 0 ? step : c);
                Preds body = lower(*s.body, head);
                break_targets_.pop_back();
                continue_targets_.pop_back();
                link(body, step >= 0 ? step : c);
                Preds out = s.expr ? head : Preds{};
                out.insert(out.end(), breaks.begin(), breaks.end());
                return out;
            }
            case StmtKind::Switch:
                return lower_switch(s, preds);
            case StmtKind::Case:
            case StmtKind::Default:
                // Case labels outside the top level of a switch body are
                // treated as plain fallthrough points.
                return preds;
            case StmtKind::Break:
                if (!break_targets_.empty()) {
                    Preds& b = *break_targets_.back();
                    b.insert(b.end(), preds.begin(), preds.end());
                }
                return {};
            case StmtKind::Continue:
                if (!continue_targets_.empty()) {
                    link(preds, continue_targets_.back());
                }
                return {};
            case StmtKind::Goto: {
                int g = add_stmt_node(NodeKind::Goto, s, nullptr);
                link(preds, g);
                gotos_.emplace_back(g, s.name);
                return {};
            }
            case StmtKind::Label: {
                int l = add_stmt_node(NodeKind::Label, s, nullptr);
                link(preds, l);
                labels_[s.name] = l;
                Preds out{l};
                if (s.body) {
                    out = lower(*s.body, out);
                }
                return out;
            }
            case StmtKind::Empty:
                return preds;
        }
        return preds;
    }

    Preds lower_switch(const Stmt& s, const Preds& preds) {
        int sw = add_stmt_node(NodeKind::Branch, s, s.expr.get());
        link(preds, sw);
        Preds chain = finish(sw);
        Preds fall;
        Preds breaks;
        int default_node = -1;
        break_targets_.push_back(&breaks);

        std::vector<const Stmt*> items;
        if (s.body && s.body->kind == StmtKind::Compound) {
            for (const auto& c : s.body->children) {
                items.push_back(c.get());
            }
        } else if (s.body) {
            items.push_back(s.body.get());
        }
        for (const Stmt* item : items) {
            if (item->kind == StmtKind::Case) {
                int t = add_stmt_node(NodeKind::Branch, *item, item->expr.get());
                link(chain, t);
                chain = {t};
                fall.push_back(t);
            } else if (item->kind == StmtKind::Default) {
                default_node = add_stmt_node(NodeKind::Label, *item, nullptr);
                link(fall, default_node);
                fall = {default_node};
            } else {
                fall = lower(*item, fall);
            }
        }
        break_targets_.pop_back();

        Preds out = fall;
        if (default_node >= 0) {
            link(chain, default_node);
        } else {
            out.insert(out.end(), chain.begin(), chain.end());
        }
        out.insert(out.end(), breaks.begin(), breaks.end());
        return out;
    }

    void mark_reachable() {
        std::vector<int> work{cfg_.entry};
        cfg_.nodes[cfg_.entry].reachable = true;
        while (!work.empty()) {
            int n = work.back();
            work.pop_back();
            for (int s : cfg_.nodes[n].succs) {
                if (!cfg_.nodes[s].reachable) {
                    cfg_.nodes[s].reachable = true;
                    work.push_back(s);
                }
            }
        }
    }
};

} // namespace

Cfg build_cfg(const StubFunction& fn, const Summaries& summaries) {
    Builder b(fn, summaries);
    return b.build(fn.parse_failed ? nullptr : fn.body.get());
}

} // namespace stublint
