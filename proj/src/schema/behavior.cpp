#include <fmt/format.h>

#include "selfx/schema.hpp"

namespace selfx::schema {

BehaviorFacts assert_behavior(KnowledgeBase& kb, std::string_view name, std::string_view effect_cls,
                              const std::vector<AttributeSpec>& props) {
    if (name.empty()) throw Error("behavior name must not be empty");
    if (find_behavior(kb, name)) throw Error(fmt::format("behavior '{}' is already registered", name));
    auto c = kb.find_class(effect_cls);
    if (!c) throw Error(fmt::format("unknown class '{}'", effect_cls));
    if (!kb.is_a(*c, cls::Creation))
        throw Error(fmt::format("effect class '{}' does not descend from Creation", effect_cls));

    BehaviorFacts f;
    f.name = std::string(name);
    f.behavior = kb.assert_instance(cls::Behavior);
    kb.assert_attribute(f.behavior, {std::string(cls::Name), Value{std::string(name)}, {}});
    f.effect = kb.assert_instance(*c);
    for (const auto& p : props) kb.assert_attribute(f.effect, p);
    f.requirement = kb.assert_instance(cls::ProcessingRequirement);
    kb.assert_link(LinkKind::role(std::string(role::petitioner)), f.requirement, f.behavior);
    kb.assert_link(LinkKind::role(std::string(role::effect)), f.requirement, f.effect);
    return f;
}

std::vector<BehaviorFacts> behaviors(const KnowledgeBase& kb) {
    std::vector<BehaviorFacts> out;
    if (!kb.find_class(cls::ProcessingRequirement)) return out;
    for (InstanceId pr : kb.instances_of(cls::ProcessingRequirement)) {
        auto bs = kb.query_role(pr, role::petitioner);
        auto es = kb.query_role(pr, role::effect);
        if (bs.empty() || es.empty()) continue;
        InstanceId b = bs.front();
        if (!kb.is_a(kb.instance(b).cls, cls::Behavior)) continue;
        auto names = kb.query_has(b, cls::Name);
        if (names.empty()) continue;
        auto text = text_of(kb, names.front());
        if (!text) continue;
        out.push_back({*text, b, es.front(), pr});
    }
    return out;
}

std::optional<BehaviorFacts> find_behavior(const KnowledgeBase& kb, std::string_view name) {
    for (auto& b : behaviors(kb))
        if (b.name == name) return b;
    return std::nullopt;
}

}  // namespace selfx::schema
