#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfx/types.hpp"

namespace selfx {

enum class ClassOrigin { Builtin, Declared };

struct ConceptClass {
    ClassId id;
    std::string name;
    std::optional<ClassId> parent;
    MetaKind meta = MetaKind::Entity;
    ClassOrigin origin = ClassOrigin::Declared;
};

struct RoleInfo {
    RoleId id;
    std::string name;
    std::optional<RoleId> parent;
};

struct Instance {
    InstanceId id;
    ClassId cls;
    std::optional<Value> value;  // present iff the class is an attribute
    Origin origin = Origin::Asserted;
    std::string name;            // empty when the instance was never bound to a name
    bool environmental = false;  // asserted as part of an environment snapshot
    std::optional<DerivationId> derivation;
};

enum class LinkType { Role, Has };

/// Kind of a link as named by callers: a role name, or the attribute class a
/// `has` link points at.
struct LinkKind {
    LinkType type = LinkType::Role;
    std::string name;

    static LinkKind role(std::string name) { return {LinkType::Role, std::move(name)}; }
    static LinkKind has(std::string attribute_class) { return {LinkType::Has, std::move(attribute_class)}; }
};

struct Link {
    LinkId id;
    LinkType type = LinkType::Role;
    RoleId role;      // valid for Role links
    ClassId has_cls;  // valid for Has links
    InstanceId source;
    InstanceId target;
    Origin origin = Origin::Asserted;
    std::optional<DerivationId> derivation;
};

struct Derivation {
    DerivationId id;
    std::string rule;
    std::vector<FactId> premises;
    FactId conclusion;
};

enum class RoleDirection {
    Forward,  // links whose source is the queried instance
    Inverse,  // links whose target is the queried instance
    Both,
};

/// Attribute value tree used to assert an attribute together with the
/// attributes it owns, e.g. Voltage("volt") owning Exact(5.0).
struct AttributeSpec {
    std::string cls;
    Value value;
    std::vector<AttributeSpec> children;
};

/// Typed hypergraph store. Relations are instances of relation classes; the
/// hyper-edge structure is expressed through role links. Role links are
/// queryable from both endpoints through the forward and backward indices.
///
/// Mutations require exclusive access. Const member functions never mutate,
/// so a knowledge base may be shared between readers between mutations.
class KnowledgeBase {
public:
    KnowledgeBase();

    // -- classes ----------------------------------------------------------
    const ConceptClass& define_class(std::string_view name, MetaKind kind,
                                     ClassOrigin origin = ClassOrigin::Declared);
    const ConceptClass& define_class(std::string_view name, std::string_view parent,
                                     ClassOrigin origin = ClassOrigin::Declared);
    /// As above, additionally failing when the parent's meta-kind differs from `expected`.
    const ConceptClass& define_class(std::string_view name, std::string_view parent, MetaKind expected,
                                     ClassOrigin origin = ClassOrigin::Declared);

    std::optional<ClassId> find_class(std::string_view name) const;
    const ConceptClass& get_class(ClassId id) const;
    const ConceptClass& get_class(std::string_view name) const;
    ClassId class_id(std::string_view name) const { return get_class(name).id; }
    std::span<const ConceptClass> classes() const { return classes_; }
    ClassId root(MetaKind kind) const;

    bool is_a(ClassId cls, ClassId ancestor) const;
    bool is_a(ClassId cls, std::string_view ancestor) const;
    /// The class itself first, its meta-kind root last.
    std::vector<ClassId> ancestors(ClassId cls) const;
    std::vector<ClassId> subclasses(ClassId cls, bool transitive = false) const;

    // -- roles ------------------------------------------------------------
    RoleId define_role(std::string_view name, std::optional<std::string_view> parent = std::nullopt);
    std::optional<RoleId> find_role(std::string_view name) const;
    const RoleInfo& role(RoleId id) const;
    std::span<const RoleInfo> roles() const { return roles_; }
    bool role_is_a(RoleId role, RoleId ancestor) const;

    // -- instances --------------------------------------------------------
    InstanceId assert_instance(ClassId cls, std::optional<Value> value = std::nullopt, std::string name = {});
    InstanceId assert_instance(std::string_view cls, std::optional<Value> value = std::nullopt,
                               std::string name = {});
    /// Asserts the attribute tree and a Has link from `owner` to its root.
    InstanceId assert_attribute(InstanceId owner, const AttributeSpec& spec);
    void mark_environmental(InstanceId id);

    bool contains(FactId id) const;
    bool is_instance(FactId id) const { return instances_.contains(id); }
    bool is_link(FactId id) const { return links_.contains(id); }
    const Instance& instance(InstanceId id) const;
    std::optional<InstanceId> find_instance(std::string_view name) const;
    InstanceId instance_named(std::string_view name) const;
    const std::map<FactId, Instance>& instances() const { return instances_; }
    std::vector<InstanceId> instances_of(ClassId cls, bool include_subclasses = true) const;
    std::vector<InstanceId> instances_of(std::string_view cls, bool include_subclasses = true) const;
    MetaKind meta_kind(InstanceId id) const { return get_class(instance(id).cls).meta; }
    /// `name` when bound, otherwise `#<id>`.
    std::string label(InstanceId id) const;

    // -- links ------------------------------------------------------------
    LinkId assert_link(const LinkKind& kind, InstanceId source, InstanceId target);
    const Link& link(LinkId id) const;
    const std::map<FactId, Link>& links() const { return links_; }
    std::span<const LinkId> outgoing(InstanceId id) const;
    std::span<const LinkId> incoming(InstanceId id) const;

    // -- queries ----------------------------------------------------------
    /// Attributes owned by `id` whose class descends from `attribute_class`.
    std::vector<InstanceId> query_has(InstanceId id, ClassId attribute_class) const;
    std::vector<InstanceId> query_has(InstanceId id, std::string_view attribute_class) const;
    /// Instances linked to `id` by a role descending from `role`.
    std::vector<InstanceId> query_role(InstanceId id, std::string_view role,
                                       RoleDirection direction = RoleDirection::Forward) const;
    std::vector<InstanceId> query_role(InstanceId id, RoleId role,
                                       RoleDirection direction = RoleDirection::Forward) const;

    // -- values -----------------------------------------------------------
    /// Current value of an attribute: an inferred value when one is recorded
    /// for this fixpoint run, the asserted value otherwise.
    const Value& value_of(InstanceId id) const;
    const Value& asserted_value(InstanceId id) const;
    /// Replaces an asserted attribute value and pins it against inferred
    /// overrides for the next recompute. Returns the previous value.
    Value set_attribute_value(InstanceId id, Value value);
    bool is_pinned(InstanceId id) const { return active_pins_.contains(id); }

    // -- inferred facts ---------------------------------------------------
    InstanceId add_inferred_instance(ClassId cls);
    LinkId add_inferred_link(const LinkKind& kind, InstanceId source, InstanceId target);
    /// Records an inferred value for an asserted attribute until the next retract.
    void set_inferred_value(InstanceId id, Value value);
    bool has_inferred_value(InstanceId id) const { return inferred_values_.contains(id); }
    DerivationId record_derivation(std::string rule, std::vector<FactId> premises, FactId conclusion);
    const Derivation& derivation(DerivationId id) const;
    const std::map<DerivationId, Derivation>& derivations() const { return derivations_; }
    std::optional<DerivationId> derivation_of(FactId id) const;

    /// Removes every inferred instance, link, derivation and inferred value.
    /// Returns the number of instances plus links removed.
    std::size_t retract_inferred();
    /// Starts a recompute: retracts inferred facts and activates the pins set
    /// since the previous recompute.
    std::size_t begin_recompute();

    bool dirty() const { return dirty_; }
    void mark_clean() { dirty_ = false; }

    std::size_t instance_count(std::optional<Origin> origin = std::nullopt) const;
    std::size_t link_count(std::optional<Origin> origin = std::nullopt) const;

private:
    ConceptClass& add_class(std::string_view name, std::optional<ClassId> parent, MetaKind meta,
                            ClassOrigin origin);
    Instance& mutable_instance(InstanceId id);
    Link make_link(const LinkKind& kind, InstanceId source, InstanceId target) const;
    LinkId insert_link(Link link);
    void collect_roles(InstanceId id, RoleId role, RoleDirection direction,
                       std::vector<InstanceId>& out) const;
    FactId next_fact() { return FactId{next_fact_++}; }

    std::vector<ConceptClass> classes_;
    std::map<std::string, ClassId, std::less<>> class_index_;
    std::vector<RoleInfo> roles_;
    std::map<std::string, RoleId, std::less<>> role_index_;

    std::map<FactId, Instance> instances_;
    std::map<FactId, Link> links_;
    std::map<FactId, std::vector<LinkId>> out_;
    std::map<FactId, std::vector<LinkId>> in_;
    std::map<std::string, InstanceId, std::less<>> name_index_;

    std::map<DerivationId, Derivation> derivations_;
    std::map<FactId, Value> inferred_values_;
    std::set<FactId> pending_pins_;
    std::set<FactId> active_pins_;

    std::uint64_t next_fact_ = 1;
    std::uint64_t next_derivation_ = 1;
    bool dirty_ = false;
};

}  // namespace selfx
