#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "selfx/schema.hpp"
#include "selfx/sxdl.hpp"

namespace selfx::sxdl {

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_literal_word(std::string_view s) { return s == "true" || s == "false" || s == "nan"; }

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + '"';
}

std::string literal(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return quote(*s);
    if (const auto* d = std::get_if<double>(&v)) {
        if (!std::isfinite(*d)) throw Error("non-finite number has no textual form");
        return format_double(*d);
    }
    return display(v);
}

class Printer {
public:
    explicit Printer(const KnowledgeBase& kb) : kb_(kb) {}

    std::string run() {
        out_ = "// selfx knowledge base\n";
        classes();
        plan();
        emit();
        return out_;
    }

private:
    struct Unit {
        InstanceId id;
        bool environmental = false;
        std::optional<schema::BehaviorFacts> behavior;
        std::vector<LinkId> trailing_links;  // link statements emitted after this unit
    };

    void classes() {
        bool any = false;
        for (const auto& c : kb_.classes()) {
            if (c.origin == ClassOrigin::Builtin) continue;
            if (!c.parent) throw Error(fmt::format("class '{}' has no parent and no textual form", c.name));
            require_identifier(c.name, "class name");
            if (!any) out_ += '\n';
            any = true;
            out_ += fmt::format("class {} : {};\n", c.name, kb_.get_class(*c.parent).name);
        }
    }

    static void require_identifier(std::string_view s, std::string_view what) {
        if (!is_identifier(s)) throw Error(fmt::format("{} '{}' is not an identifier", what, s));
    }

    bool asserted(FactId id) const {
        if (kb_.is_instance(id)) return kb_.instance(id).origin == Origin::Asserted;
        return kb_.link(id).origin == Origin::Asserted;
    }

    std::vector<LinkId> asserted_links(std::span<const LinkId> ids) const {
        std::vector<LinkId> out;
        for (LinkId l : ids)
            if (asserted(l)) out.push_back(l);
        return out;
    }

    /// Walks the attribute tree owned through `has` and records ownership.
    void claim_attributes(InstanceId owner) {
        for (LinkId lid : asserted_links(kb_.outgoing(owner))) {
            const Link& l = kb_.link(lid);
            if (l.type != LinkType::Has) {
                if (kb_.meta_kind(owner) == MetaKind::Attribute)
                    throw Error(fmt::format("attribute {} is linked by role and has no textual form", kb_.label(owner)));
                continue;
            }
            if (kb_.instance(l.target).cls != l.has_cls)
                throw Error(fmt::format("has-link {} names class '{}' but points at a '{}'", lid.value,
                                        kb_.get_class(l.has_cls).name,
                                        kb_.get_class(kb_.instance(l.target).cls).name));
            if (!owned_.insert(l.target).second)
                throw Error(fmt::format("attribute {} is shared between owners and has no textual form",
                                        kb_.label(l.target)));
            if (asserted_links(kb_.incoming(l.target)).size() != 1)
                throw Error(fmt::format("attribute {} is linked by role and has no textual form", kb_.label(l.target)));
            claim_attributes(l.target);
        }
    }

    std::optional<schema::BehaviorFacts> behavior_unit(InstanceId b) const {
        const Instance& inst = kb_.instance(b);
        if (inst.environmental || !inst.name.empty() || inst.cls != kb_.class_id(schema::cls::Behavior)) return {};
        std::optional<schema::BehaviorFacts> found;
        for (const auto& f : schema::behaviors(kb_))
            if (f.behavior == b) found = f;
        if (!found) return {};
        const Instance& e = kb_.instance(found->effect);
        const Instance& pr = kb_.instance(found->requirement);
        if (!e.name.empty() || e.environmental || e.origin != Origin::Asserted) return {};
        if (!pr.name.empty() || pr.environmental || pr.origin != Origin::Asserted) return {};
        if (pr.cls != kb_.class_id(schema::cls::ProcessingRequirement)) return {};
        if (!(found->behavior < found->effect && found->effect < found->requirement)) return {};

        // Exactly the facts a behavior declaration produces, nothing more.
        auto out_b = asserted_links(kb_.outgoing(b));
        if (out_b.size() != 1 || kb_.link(out_b[0]).type != LinkType::Has) return {};
        const Link& name_link = kb_.link(out_b[0]);
        if (kb_.instance(name_link.target).cls != kb_.class_id(schema::cls::Name) ||
            name_link.has_cls != kb_.class_id(schema::cls::Name) || !kb_.outgoing(name_link.target).empty() ||
            !is_text(kb_.asserted_value(name_link.target)))
            return {};
        if (asserted_links(kb_.incoming(b)).size() != 1) return {};
        if (asserted_links(kb_.incoming(found->effect)).size() != 1) return {};
        for (LinkId l : asserted_links(kb_.outgoing(found->effect)))
            if (kb_.link(l).type != LinkType::Has) return {};
        if (!asserted_links(kb_.incoming(found->requirement)).empty()) return {};
        auto out_pr = asserted_links(kb_.outgoing(found->requirement));
        if (out_pr.size() != 2) return {};
        return found;
    }

    void plan() {
        std::set<InstanceId> taken;  // covered by a behavior unit
        for (const auto& [id, inst] : kb_.instances()) {
            if (inst.origin != Origin::Asserted || kb_.meta_kind(id) == MetaKind::Attribute || taken.contains(id))
                continue;
            Unit u{id, inst.environmental, behavior_unit(id), {}};
            if (u.behavior) {
                taken.insert(u.behavior->effect);
                taken.insert(u.behavior->requirement);
                owned_.insert(kb_.query_has(id, schema::cls::Name).front());
                claim_attributes(u.behavior->effect);
            } else {
                claim_attributes(id);
            }
            position_[id] = units_.size();
            units_.push_back(std::move(u));
        }

        for (const auto& [id, inst] : kb_.instances())
            if (inst.origin == Origin::Asserted && kb_.meta_kind(id) == MetaKind::Attribute && !owned_.contains(id))
                throw Error(fmt::format("attribute {} is owned by nothing and has no textual form", kb_.label(id)));

        // Names: bound names are kept, the rest get generated ones.
        std::set<std::string> used;
        for (const auto& u : units_)
            if (!kb_.instance(u.id).name.empty()) used.insert(kb_.instance(u.id).name);
        for (const auto& u : units_) {
            const std::string& bound = kb_.instance(u.id).name;
            if (!bound.empty()) {
                require_identifier(bound, "instance name");
                names_[u.id] = bound;
            } else if (!u.behavior) {
                std::string n = fmt::format("_{}", u.id.value);
                while (used.contains(n)) n += '_';
                used.insert(n);
                names_[u.id] = n;
            }
        }

        // Role links: inline in the source when the target precedes it,
        // otherwise a link statement after the target.
        for (const auto& [lid, l] : kb_.links()) {
            if (l.origin != Origin::Asserted || l.type != LinkType::Role) continue;
            if (covered_by_behavior(l)) continue;
            auto s = position_.find(l.source);
            auto t = position_.find(l.target);
            if (s == position_.end() || t == position_.end())
                throw Error(fmt::format("role link {} touches a fact with no textual form", lid.value));
            require_identifier(kb_.role(l.role).name, "role name");
            if (units_[t->second].behavior || units_[s->second].behavior)
                throw Error(fmt::format("role link {} touches a behavior and has no textual form", lid.value));
            if (t->second < s->second)
                inline_.insert(lid);
            else
                units_[t->second].trailing_links.push_back(lid);
        }
    }

    bool covered_by_behavior(const Link& l) const {
        auto it = position_.find(l.target);
        if (it == position_.end()) {
            // the effect is not a unit of its own
            for (const auto& u : units_)
                if (u.behavior && u.behavior->effect == l.target && u.behavior->requirement == l.source) return true;
            return false;
        }
        const Unit& u = units_[it->second];
        return u.behavior && u.behavior->behavior == l.target && u.behavior->requirement == l.source;
    }

    void attribute(InstanceId attr, int depth) {
        const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
        const std::string& cls = kb_.get_class(kb_.instance(attr).cls).name;
        require_identifier(cls, "class name");
        const Value& v = kb_.asserted_value(attr);
        auto children = asserted_links(kb_.outgoing(attr));
        if (children.empty()) {
            out_ += fmt::format("{}has {} = {};\n", indent, cls, literal(v));
            return;
        }
        const auto* text = std::get_if<std::string>(&v);
        std::string head = text && is_identifier(*text) && !is_literal_word(*text) ? *text : literal(v);
        out_ += fmt::format("{}has {} {} {{\n", indent, cls, head);
        for (LinkId l : children) attribute(kb_.link(l).target, depth + 1);
        out_ += indent + "}\n";
    }

    void instance(const Unit& u, int depth) {
        const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
        const std::string& cls = kb_.get_class(kb_.instance(u.id).cls).name;
        out_ += fmt::format("{}instance {} : {} {{\n", indent, names_.at(u.id), cls);
        for (LinkId lid : asserted_links(kb_.outgoing(u.id))) {
            const Link& l = kb_.link(lid);
            if (l.type == LinkType::Has)
                attribute(l.target, depth + 1);
            else if (inline_.contains(lid))
                out_ += fmt::format("{}  role {} -> {};\n", indent, kb_.role(l.role).name, names_.at(l.target));
        }
        out_ += indent + "}\n";
    }

    void behavior(const schema::BehaviorFacts& b) {
        std::string name = is_identifier(b.name) ? b.name : quote(b.name);
        const std::string& cls = kb_.get_class(kb_.instance(b.effect).cls).name;
        out_ += fmt::format("behavior {} {{\n  effect : {} {{\n", name, cls);
        for (LinkId l : asserted_links(kb_.outgoing(b.effect))) attribute(kb_.link(l).target, 2);
        out_ += "  }\n}\n";
    }

    void emit() {
        bool in_env = false;
        for (const Unit& u : units_) {
            if (u.environmental != in_env) {
                if (in_env) out_ += "}\n";
                out_ += '\n';
                if (u.environmental) out_ += "environment {\n";
                in_env = u.environmental;
            } else if (!in_env) {
                out_ += '\n';
            }
            if (u.behavior)
                behavior(*u.behavior);
            else
                instance(u, in_env ? 1 : 0);

            if (!u.trailing_links.empty()) {
                if (in_env) {
                    out_ += "}\n";
                    in_env = false;
                }
                for (LinkId lid : u.trailing_links) {
                    const Link& l = kb_.link(lid);
                    out_ += fmt::format("link {}.{} -> {};\n", names_.at(l.source), kb_.role(l.role).name,
                                        names_.at(l.target));
                }
            }
        }
        if (in_env) out_ += "}\n";
    }

    const KnowledgeBase& kb_;
    std::string out_;
    std::vector<Unit> units_;
    std::map<InstanceId, std::size_t> position_;
    std::map<InstanceId, std::string> names_;
    std::set<InstanceId> owned_;
    std::set<LinkId> inline_;
};

}  // namespace

std::string dump(const KnowledgeBase& kb) { return Printer(kb).run(); }

std::map<std::string, double> environment_features(const Document& doc) {
    std::map<std::string, double> out;
    for (const auto& s : doc.statements) {
        const auto* env = std::get_if<EnvDecl>(&s);
        if (!env) continue;
        for (const auto& inst : env->instances) {
            for (const auto& item : inst.items) {
                const auto* a = std::get_if<AttrAssign>(&item);
                if (!a) continue;
                std::optional<double> amount;
                if (const auto* d = std::get_if<double>(&a->value)) amount = *d;
                for (const auto& c : a->children)
                    if (const auto* d = std::get_if<double>(&c.value); d && !amount && c.cls == schema::cls::Exact)
                        amount = *d;
                if (amount) out.emplace(fmt::format("{}.{}", inst.name, a->cls), *amount);
            }
        }
    }
    return out;
}

}  // namespace selfx::sxdl
