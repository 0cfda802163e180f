#include <fmt/format.h>

#include "selfx/schema.hpp"
#include "selfx/sxdl.hpp"

namespace selfx::sxdl {

LoadError::LoadError(const std::string& message, SourceSpan where)
    : Error(fmt::format("{}:{}: {}", where.line, where.column, message)), where_(where) {}

namespace {

class Loader {
public:
    Loader(KnowledgeBase& kb, LoadReport& report) : kb_(kb), report_(report) {}

    void statement(const Statement& s) {
        std::visit([this](const auto& d) { declare(d); }, s);
    }

private:
    template <typename F>
    void at(SourceSpan span, F&& f) {
        try {
            f();
        } catch (const LoadError&) {
            throw;
        } catch (const Error& e) {
            throw LoadError(e.what(), span);
        }
    }

    ClassId known_class(const std::string& name, SourceSpan span) {
        auto c = kb_.find_class(name);
        if (!c) throw LoadError(fmt::format("unknown class '{}'", name), span);
        return *c;
    }

    InstanceId bound(const std::string& name, SourceSpan span) {
        auto id = kb_.find_instance(name);
        if (!id) throw LoadError(fmt::format("unknown instance '{}'", name), span);
        return *id;
    }

    AttributeSpec attribute(const AttrAssign& a) {
        ClassId c = known_class(a.cls, a.span);
        if (kb_.get_class(c).meta != MetaKind::Attribute)
            throw LoadError(fmt::format("link-kind violation: '{}' is not an attribute class", a.cls), a.span);
        AttributeSpec spec{a.cls, a.value, {}};
        for (const auto& child : a.children) spec.children.push_back(attribute(child));
        return spec;
    }

    void declare(const ClassDecl& d) {
        at(d.span, [&] { kb_.define_class(d.name, d.parent); });
    }

    InstanceId declare_instance(const InstanceDecl& d) {
        ClassId c = known_class(d.cls, d.span);
        if (kb_.get_class(c).meta == MetaKind::Attribute)
            throw LoadError(
                fmt::format("attribute-arity violation: '{}' is an attribute class and needs a value; use 'has'", d.cls),
                d.span);
        InstanceId id;
        at(d.span, [&] { id = kb_.assert_instance(c, std::nullopt, d.name); });
        report_.bindings[d.name] = id;
        for (const auto& item : d.items) {
            if (const auto* a = std::get_if<AttrAssign>(&item)) {
                auto spec = attribute(*a);
                at(a->span, [&] { kb_.assert_attribute(id, spec); });
            } else {
                const auto& r = std::get<RoleAssign>(item);
                InstanceId target = bound(r.target, r.span);
                at(r.span, [&] { kb_.assert_link(LinkKind::role(r.role), id, target); });
            }
        }
        return id;
    }

    void declare(const InstanceDecl& d) { declare_instance(d); }

    void declare(const LinkDecl& d) {
        InstanceId s = bound(d.source, d.span);
        InstanceId t = bound(d.target, d.span);
        at(d.span, [&] { kb_.assert_link(LinkKind::role(d.role), s, t); });
    }

    void declare(const EnvDecl& d) {
        for (const auto& inst : d.instances) {
            InstanceId id = declare_instance(inst);
            kb_.mark_environmental(id);
        }
    }

    void declare(const BehaviorDecl& d) {
        std::vector<AttributeSpec> props;
        for (const auto& p : d.props) props.push_back(attribute(p));
        at(d.span, [&] { schema::assert_behavior(kb_, d.name, d.effect_cls, props); });
    }

    KnowledgeBase& kb_;
    LoadReport& report_;
};

}  // namespace

LoadReport load(const Document& doc, KnowledgeBase& kb) {
    KnowledgeBase staged = kb;
    LoadReport report;
    Loader loader(staged, report);
    for (const auto& s : doc.statements) loader.statement(s);

    report.classes_added = staged.classes().size() - kb.classes().size();
    report.instances_added = staged.instance_count() - kb.instance_count();
    report.links_added = staged.link_count() - kb.link_count();
    kb = std::move(staged);
    return report;
}

}  // namespace selfx::sxdl
