#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfx/kb.hpp"

namespace selfx::schema {

// Class and role names of the built-in ontology.
namespace cls {
inline constexpr std::string_view Component = "Component";
inline constexpr std::string_view Sensor = "Sensor";
inline constexpr std::string_view Actuator = "Actuator";
inline constexpr std::string_view Functional = "Functional";
inline constexpr std::string_view Appliance = "Appliance";
inline constexpr std::string_view Creation = "Creation";
inline constexpr std::string_view Data = "Data";
inline constexpr std::string_view Resource = "Resource";
inline constexpr std::string_view PhysicalPhenomena = "PhysicalPhenomena";
inline constexpr std::string_view Light = "Light";
inline constexpr std::string_view Sound = "Sound";
inline constexpr std::string_view Behavior = "Behavior";
inline constexpr std::string_view Require = "Require";
inline constexpr std::string_view FunctionalRequirement = "FunctionalRequirement";
inline constexpr std::string_view NonFunctionalRequirement = "NonFunctionalRequirement";
inline constexpr std::string_view EnvironmentalRequirement = "EnvironmentalRequirement";
inline constexpr std::string_view Featuring = "Featuring";
inline constexpr std::string_view Realizing = "Realizing";
inline constexpr std::string_view Processing = "Processing";
inline constexpr std::string_view ProcessingRequirement = "ProcessingRequirement";
inline constexpr std::string_view Property = "Property";
inline constexpr std::string_view Quality = "Quality";
inline constexpr std::string_view Rate = "Rate";
inline constexpr std::string_view Format = "Format";
inline constexpr std::string_view Location = "Location";
inline constexpr std::string_view Range = "Range";
inline constexpr std::string_view Min = "Min";
inline constexpr std::string_view Max = "Max";
inline constexpr std::string_view Exact = "Exact";
inline constexpr std::string_view Capacity = "Capacity";
inline constexpr std::string_view Throughput = "Throughput";
inline constexpr std::string_view PhysicalQuantity = "PhysicalQuantity";
inline constexpr std::string_view HealthState = "HealthState";
inline constexpr std::string_view Name = "Name";
}  // namespace cls

namespace role {
inline constexpr std::string_view petitioner = "petitioner";
inline constexpr std::string_view call = "call";
inline constexpr std::string_view input = "input";
inline constexpr std::string_view service = "service";
inline constexpr std::string_view state = "state";
inline constexpr std::string_view product = "product";
inline constexpr std::string_view output = "output";
inline constexpr std::string_view outcome = "outcome";
inline constexpr std::string_view subject = "subject";
inline constexpr std::string_view feature = "feature";
inline constexpr std::string_view requester = "requester";
inline constexpr std::string_view provider = "provider";
inline constexpr std::string_view executor = "executor";
inline constexpr std::string_view effect = "effect";
}  // namespace role

/// Installs the component ontology: Component, Creation, Require and Property
/// hierarchies, the Featuring/Realizing/Processing relations, the behavior
/// vocabulary and the role names. Atomic: on a name collision nothing is
/// installed. Returns the number of classes registered.
std::size_t load_builtin_schema(KnowledgeBase& kb);

/// A fresh knowledge base with the built-in schema installed.
KnowledgeBase make_knowledge_base();

// -- requirement structure -------------------------------------------------

enum class RequireKind { Functional, NonFunctional, Environmental };
std::string_view abbreviation(RequireKind kind);  // FR, NFR, ER

struct Requirement {
    InstanceId relation;
    RequireKind kind = RequireKind::Functional;
    std::string call_role;  // most specific role of the first call, e.g. "service"
    std::vector<InstanceId> calls;  // Featuring instances
    std::optional<InstanceId> product;
    std::string product_role;
};

/// One entry per Require relation petitioned by `component`, in assertion order.
std::vector<Requirement> list_requirements(const KnowledgeBase& kb, InstanceId component);

/// Require relations linked to `component` as petitioner.
std::vector<InstanceId> requirements_of(const KnowledgeBase& kb, InstanceId component);
/// Featuring instances reached from `require` by roles descending from `call_role`.
std::vector<InstanceId> calls_of(const KnowledgeBase& kb, InstanceId require, std::string_view call_role);
std::vector<InstanceId> products_of(const KnowledgeBase& kb, InstanceId require);
/// Creations playing subject in a Featuring.
std::vector<InstanceId> featuring_subjects(const KnowledgeBase& kb, InstanceId featuring);
/// Properties featured by a Featuring: owned through has-links or linked by
/// the `feature` role.
std::vector<InstanceId> featured_properties(const KnowledgeBase& kb, InstanceId featuring);
/// Every property featured for `creation` across all Featurings it is subject of.
std::vector<InstanceId> featured_properties_of_subject(const KnowledgeBase& kb, InstanceId creation);
bool is_featuring_subject(const KnowledgeBase& kb, InstanceId creation);
/// Creations that are the effect of a ProcessingRequirement (behavior effects).
bool is_behavior_effect(const KnowledgeBase& kb, InstanceId creation);
/// Creations produced by some Require relation (outputs/outcomes of components).
bool is_component_product(const KnowledgeBase& kb, InstanceId creation);

// -- property constraints ----------------------------------------------------

/// Numeric constraints carried by a featured property: its own numeric value
/// and Exact children act as equalities, Min/Max children as inclusive bounds.
struct Constraints {
    std::vector<double> exact;
    std::vector<double> min;
    std::vector<double> max;

    bool empty() const { return exact.empty() && min.empty() && max.empty(); }
};

inline constexpr double exact_tolerance = 1e-9;

Constraints constraints_of(const KnowledgeBase& kb, InstanceId property);
/// Amounts a provided property offers: its own numeric value (a NaN sentinel
/// counts as an amount that satisfies nothing) and its Exact children.
std::vector<double> amounts_of(const KnowledgeBase& kb, InstanceId property);
bool satisfies(const Constraints& c, double amount);
/// Text carried by the property itself (a unit, a format, a topic), if any.
std::optional<std::string> text_of(const KnowledgeBase& kb, InstanceId property);

/// Generic property match: the provided property's class descends from the
/// featured one, any text matches exactly, and every amount satisfies every
/// numeric constraint (at least one amount is required when constraints exist).
bool property_matches(const KnowledgeBase& kb, InstanceId featured, InstanceId provided);

// -- behaviors -------------------------------------------------------------

/// The facts standing for one behavior: a Behavior instance named through a
/// Name attribute, the effect creation with its featured properties, and the
/// ProcessingRequirement tying them (petitioner -> behavior, effect -> effect).
struct BehaviorFacts {
    std::string name;
    InstanceId behavior;
    InstanceId effect;
    InstanceId requirement;
};

/// Throws on a duplicate behavior name, an unknown class, or an effect class
/// that does not descend from Creation.
BehaviorFacts assert_behavior(KnowledgeBase& kb, std::string_view name, std::string_view effect_cls,
                              const std::vector<AttributeSpec>& props);
/// Registered behaviors in assertion order.
std::vector<BehaviorFacts> behaviors(const KnowledgeBase& kb);
std::optional<BehaviorFacts> find_behavior(const KnowledgeBase& kb, std::string_view name);

// -- validation ------------------------------------------------------------

struct Violation {
    std::string rule;
    std::string message;
};

struct ValidationReport {
    InstanceId subject;
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks a component against its design pattern:
///  - require-present: at least one Require petitioned by the component;
///  - kind-pattern: the Require/call/product shape its component kind prescribes;
///  - featured-call: every Featuring used as a call features a property.
/// Read-only.
ValidationReport validate_component(const KnowledgeBase& kb, InstanceId component);

}  // namespace selfx::schema
