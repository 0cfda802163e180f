#include <array>
#include <string_view>
#include <utility>

#include <fmt/format.h>

#include "selfx/schema.hpp"

namespace selfx::schema {

namespace {

struct ClassEntry {
    std::string_view name;
    std::string_view parent;  // a meta-kind root or an earlier entry
};

// Parents always precede their children.
constexpr std::array kClasses = {
    // Component hierarchy
    ClassEntry{"Component", "Entity"},
    ClassEntry{"Sensor", "Component"},
    ClassEntry{"Actuator", "Component"},
    ClassEntry{"Functional", "Component"},
    ClassEntry{"Appliance", "Component"},
    // Creation hierarchy
    ClassEntry{"Creation", "Entity"},
    ClassEntry{"Data", "Creation"},
    ClassEntry{"Signal", "Data"},
    ClassEntry{"Information", "Data"},
    ClassEntry{"Knowledge", "Data"},
    ClassEntry{"Resource", "Creation"},
    ClassEntry{"ElectricalPower", "Resource"},
    ClassEntry{"Computation", "Resource"},
    ClassEntry{"Communication", "Resource"},
    ClassEntry{"PhysicalPhenomena", "Creation"},
    ClassEntry{"Light", "PhysicalPhenomena"},
    ClassEntry{"Sound", "PhysicalPhenomena"},
    ClassEntry{"Speed", "PhysicalPhenomena"},
    ClassEntry{"Behavior", "Entity"},
    // Relations
    ClassEntry{"Require", "Relation"},
    ClassEntry{"FunctionalRequirement", "Require"},
    ClassEntry{"NonFunctionalRequirement", "Require"},
    ClassEntry{"EnvironmentalRequirement", "Require"},
    ClassEntry{"Featuring", "Relation"},
    ClassEntry{"Realizing", "Relation"},
    ClassEntry{"Processing", "Relation"},
    ClassEntry{"ProcessingRequirement", "Relation"},
    // Property hierarchy
    ClassEntry{"Property", "Attribute"},
    ClassEntry{"Quality", "Property"},
    ClassEntry{"Rate", "Property"},
    ClassEntry{"FPS", "Rate"},
    ClassEntry{"PS", "Rate"},
    ClassEntry{"Format", "Property"},
    ClassEntry{"ROSmsgs", "Format"},
    ClassEntry{"Location", "Property"},
    ClassEntry{"ROStopic", "Location"},
    ClassEntry{"Range", "Property"},
    ClassEntry{"Min", "Range"},
    ClassEntry{"Max", "Range"},
    ClassEntry{"Exact", "Range"},
    ClassEntry{"Capacity", "Property"},
    ClassEntry{"Throughput", "Property"},
    ClassEntry{"Power", "Throughput"},
    ClassEntry{"PhysicalQuantity", "Property"},
    ClassEntry{"Wavelength", "PhysicalQuantity"},
    ClassEntry{"Intensity", "PhysicalQuantity"},
    ClassEntry{"Voltage", "PhysicalQuantity"},
    ClassEntry{"HealthState", "Property"},
    ClassEntry{"Name", "Property"},
};

struct RoleEntry {
    std::string_view name;
    std::string_view parent;  // empty for top-level roles
};

constexpr std::array kRoles = {
    RoleEntry{"petitioner", ""}, RoleEntry{"call", ""},      RoleEntry{"input", "call"},
    RoleEntry{"service", "call"}, RoleEntry{"state", "call"}, RoleEntry{"product", ""},
    RoleEntry{"output", "product"}, RoleEntry{"outcome", "product"}, RoleEntry{"subject", ""},
    RoleEntry{"feature", ""},     RoleEntry{"requester", ""}, RoleEntry{"provider", ""},
    RoleEntry{"executor", ""},    RoleEntry{"effect", ""},
};

}  // namespace

std::size_t load_builtin_schema(KnowledgeBase& kb) {
    for (const auto& c : kClasses)
        if (kb.find_class(c.name)) throw Error(fmt::format("built-in class '{}' collides with an existing class", c.name));
    for (const auto& r : kRoles)
        if (kb.find_role(r.name)) throw Error(fmt::format("built-in role '{}' collides with an existing role", r.name));

    for (const auto& c : kClasses) kb.define_class(c.name, c.parent, ClassOrigin::Builtin);
    for (const auto& r : kRoles) {
        if (r.parent.empty())
            kb.define_role(r.name);
        else
            kb.define_role(r.name, r.parent);
    }
    return kClasses.size();
}

KnowledgeBase make_knowledge_base() {
    KnowledgeBase kb;
    load_builtin_schema(kb);
    kb.mark_clean();
    return kb;
}

}  // namespace selfx::schema
