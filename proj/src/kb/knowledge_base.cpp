#include "selfx/kb.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>

namespace selfx {

std::string_view to_string(MetaKind kind) {
    switch (kind) {
        case MetaKind::Entity: return "Entity";
        case MetaKind::Relation: return "Relation";
        case MetaKind::Attribute: return "Attribute";
    }
    return "?";
}

std::string_view to_string(Origin origin) {
    return origin == Origin::Asserted ? "asserted" : "inferred";
}

Value normalize(Value v) {
    if (const double* d = std::get_if<double>(&v); d && std::isnan(*d)) return NotANumber{};
    return v;
}

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::string display(const Value& v) {
    struct Visitor {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(double d) const { return format_double(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(NotANumber) const { return "nan"; }
    };
    return std::visit(Visitor{}, v);
}

namespace {

void sort_unique(std::vector<InstanceId>& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

}  // namespace

KnowledgeBase::KnowledgeBase() {
    add_class("Entity", std::nullopt, MetaKind::Entity, ClassOrigin::Builtin);
    add_class("Relation", std::nullopt, MetaKind::Relation, ClassOrigin::Builtin);
    add_class("Attribute", std::nullopt, MetaKind::Attribute, ClassOrigin::Builtin);
}

// -- classes ---------------------------------------------------------------

ConceptClass& KnowledgeBase::add_class(std::string_view name, std::optional<ClassId> parent, MetaKind meta,
                                       ClassOrigin origin) {
    if (name.empty()) throw Error("class name must not be empty");
    if (class_index_.contains(name)) throw Error(fmt::format("duplicate class name '{}'", name));
    ClassId id{static_cast<std::uint32_t>(classes_.size())};
    classes_.push_back(ConceptClass{id, std::string(name), parent, meta, origin});
    class_index_.emplace(std::string(name), id);
    return classes_.back();
}

const ConceptClass& KnowledgeBase::define_class(std::string_view name, MetaKind kind, ClassOrigin origin) {
    return add_class(name, root(kind), kind, origin);
}

const ConceptClass& KnowledgeBase::define_class(std::string_view name, std::string_view parent,
                                                ClassOrigin origin) {
    auto p = find_class(parent);
    if (!p) throw Error(fmt::format("unknown parent class '{}' for '{}'", parent, name));
    return add_class(name, *p, classes_[p->value].meta, origin);
}

const ConceptClass& KnowledgeBase::define_class(std::string_view name, std::string_view parent,
                                                MetaKind expected, ClassOrigin origin) {
    auto p = find_class(parent);
    if (!p) throw Error(fmt::format("unknown parent class '{}' for '{}'", parent, name));
    if (classes_[p->value].meta != expected)
        throw Error(fmt::format("class '{}' is declared {} but parent '{}' is {}", name, to_string(expected),
                                parent, to_string(classes_[p->value].meta)));
    return add_class(name, *p, expected, origin);
}

std::optional<ClassId> KnowledgeBase::find_class(std::string_view name) const {
    auto it = class_index_.find(name);
    if (it == class_index_.end()) return std::nullopt;
    return it->second;
}

const ConceptClass& KnowledgeBase::get_class(ClassId id) const {
    if (id.value >= classes_.size()) throw Error(fmt::format("unknown class id {}", id.value));
    return classes_[id.value];
}

const ConceptClass& KnowledgeBase::get_class(std::string_view name) const {
    auto id = find_class(name);
    if (!id) throw Error(fmt::format("unknown class '{}'", name));
    return classes_[id->value];
}

ClassId KnowledgeBase::root(MetaKind kind) const {
    switch (kind) {
        case MetaKind::Entity: return ClassId{0};
        case MetaKind::Relation: return ClassId{1};
        case MetaKind::Attribute: return ClassId{2};
    }
    return ClassId{0};
}

bool KnowledgeBase::is_a(ClassId cls, ClassId ancestor) const {
    std::optional<ClassId> cur = cls;
    while (cur) {
        if (*cur == ancestor) return true;
        cur = classes_[cur->value].parent;
    }
    return false;
}

bool KnowledgeBase::is_a(ClassId cls, std::string_view ancestor) const {
    auto a = find_class(ancestor);
    return a && is_a(cls, *a);
}

std::vector<ClassId> KnowledgeBase::ancestors(ClassId cls) const {
    std::vector<ClassId> chain;
    std::optional<ClassId> cur = get_class(cls).id;
    while (cur) {
        chain.push_back(*cur);
        cur = classes_[cur->value].parent;
    }
    return chain;
}

std::vector<ClassId> KnowledgeBase::subclasses(ClassId cls, bool transitive) const {
    std::vector<ClassId> out;
    for (const auto& c : classes_) {
        if (c.id == cls || !c.parent) continue;
        if (transitive ? is_a(c.id, cls) : *c.parent == cls) out.push_back(c.id);
    }
    return out;
}

// -- roles -----------------------------------------------------------------

RoleId KnowledgeBase::define_role(std::string_view name, std::optional<std::string_view> parent) {
    if (name.empty()) throw Error("role name must not be empty");
    if (role_index_.contains(name)) throw Error(fmt::format("duplicate role name '{}'", name));
    std::optional<RoleId> p;
    if (parent) {
        p = find_role(*parent);
        if (!p) throw Error(fmt::format("unknown parent role '{}'", *parent));
    }
    RoleId id{static_cast<std::uint32_t>(roles_.size())};
    roles_.push_back(RoleInfo{id, std::string(name), p});
    role_index_.emplace(std::string(name), id);
    return id;
}

std::optional<RoleId> KnowledgeBase::find_role(std::string_view name) const {
    auto it = role_index_.find(name);
    if (it == role_index_.end()) return std::nullopt;
    return it->second;
}

const RoleInfo& KnowledgeBase::role(RoleId id) const {
    if (id.value >= roles_.size()) throw Error(fmt::format("unknown role id {}", id.value));
    return roles_[id.value];
}

bool KnowledgeBase::role_is_a(RoleId r, RoleId ancestor) const {
    std::optional<RoleId> cur = r;
    while (cur) {
        if (*cur == ancestor) return true;
        cur = roles_[cur->value].parent;
    }
    return false;
}

// -- instances ---------------------------------------------------------------

InstanceId KnowledgeBase::assert_instance(ClassId cls, std::optional<Value> value, std::string name) {
    const ConceptClass& c = get_class(cls);
    if (c.meta == MetaKind::Attribute && !value)
        throw Error(fmt::format("attribute instance of '{}' requires a value", c.name));
    if (c.meta != MetaKind::Attribute && value)
        throw Error(fmt::format("instance of {} class '{}' cannot carry a value", to_string(c.meta), c.name));
    if (!name.empty() && name_index_.contains(name))
        throw Error(fmt::format("instance name '{}' is already bound", name));
    Instance inst;
    inst.id = next_fact();
    inst.cls = cls;
    if (value) inst.value = normalize(std::move(*value));
    inst.origin = Origin::Asserted;
    inst.name = std::move(name);
    if (!inst.name.empty()) name_index_.emplace(inst.name, inst.id);
    InstanceId id = inst.id;
    instances_.emplace(id, std::move(inst));
    dirty_ = true;
    return id;
}

InstanceId KnowledgeBase::assert_instance(std::string_view cls, std::optional<Value> value, std::string name) {
    return assert_instance(class_id(cls), std::move(value), std::move(name));
}

InstanceId KnowledgeBase::assert_attribute(InstanceId owner, const AttributeSpec& spec) {
    InstanceId attr = assert_instance(spec.cls, spec.value);
    assert_link(LinkKind::has(spec.cls), owner, attr);
    for (const auto& child : spec.children) assert_attribute(attr, child);
    return attr;
}

void KnowledgeBase::mark_environmental(InstanceId id) {
    mutable_instance(id).environmental = true;
    dirty_ = true;
}

bool KnowledgeBase::contains(FactId id) const { return instances_.contains(id) || links_.contains(id); }

const Instance& KnowledgeBase::instance(InstanceId id) const {
    auto it = instances_.find(id);
    if (it == instances_.end()) throw Error(fmt::format("unknown instance #{}", id.value));
    return it->second;
}

Instance& KnowledgeBase::mutable_instance(InstanceId id) {
    auto it = instances_.find(id);
    if (it == instances_.end()) throw Error(fmt::format("unknown instance #{}", id.value));
    return it->second;
}

std::optional<InstanceId> KnowledgeBase::find_instance(std::string_view name) const {
    auto it = name_index_.find(name);
    if (it == name_index_.end()) return std::nullopt;
    return it->second;
}

InstanceId KnowledgeBase::instance_named(std::string_view name) const {
    auto id = find_instance(name);
    if (!id) throw Error(fmt::format("unknown instance '{}'", name));
    return *id;
}

std::vector<InstanceId> KnowledgeBase::instances_of(ClassId cls, bool include_subclasses) const {
    std::vector<InstanceId> out;
    for (const auto& [id, inst] : instances_) {
        if (include_subclasses ? is_a(inst.cls, cls) : inst.cls == cls) out.push_back(id);
    }
    return out;
}

std::vector<InstanceId> KnowledgeBase::instances_of(std::string_view cls, bool include_subclasses) const {
    auto id = find_class(cls);
    if (!id) return {};
    return instances_of(*id, include_subclasses);
}

std::string KnowledgeBase::label(InstanceId id) const {
    const Instance& inst = instance(id);
    if (!inst.name.empty()) return inst.name;
    return fmt::format("#{}", id.value);
}

// -- links -------------------------------------------------------------------

Link KnowledgeBase::make_link(const LinkKind& kind, InstanceId source, InstanceId target) const {
    if (!instances_.contains(source)) throw Error(fmt::format("dangling link source #{}", source.value));
    if (!instances_.contains(target)) throw Error(fmt::format("dangling link target #{}", target.value));
    Link l;
    l.type = kind.type;
    l.source = source;
    l.target = target;
    if (kind.type == LinkType::Role) {
        auto r = find_role(kind.name);
        if (!r) throw Error(fmt::format("unknown role '{}'", kind.name));
        if (source == target) throw Error(fmt::format("role '{}' cannot link #{} to itself", kind.name, source.value));
        l.role = *r;
    } else {
        auto c = find_class(kind.name);
        if (!c) throw Error(fmt::format("unknown attribute class '{}'", kind.name));
        if (classes_[c->value].meta != MetaKind::Attribute)
            throw Error(fmt::format("has-link kind '{}' is not an attribute class", kind.name));
        const Instance& t = instances_.at(target);
        if (classes_[t.cls.value].meta != MetaKind::Attribute)
            throw Error(fmt::format("has{} must point to an attribute, but #{} is a {} of class '{}'", kind.name,
                                    target.value, to_string(classes_[t.cls.value].meta), classes_[t.cls.value].name));
        if (!is_a(t.cls, *c))
            throw Error(fmt::format("has{} target #{} has class '{}'", kind.name, target.value,
                                    classes_[t.cls.value].name));
        l.has_cls = *c;
    }
    return l;
}

LinkId KnowledgeBase::insert_link(Link link) {
    link.id = next_fact();
    out_[link.source].push_back(link.id);
    in_[link.target].push_back(link.id);
    LinkId id = link.id;
    links_.emplace(id, std::move(link));
    return id;
}

LinkId KnowledgeBase::assert_link(const LinkKind& kind, InstanceId source, InstanceId target) {
    Link l = make_link(kind, source, target);
    if (instances_.at(source).origin == Origin::Inferred || instances_.at(target).origin == Origin::Inferred)
        throw Error("asserted links cannot touch inferred instances");
    l.origin = Origin::Asserted;
    LinkId id = insert_link(std::move(l));
    dirty_ = true;
    return id;
}

const Link& KnowledgeBase::link(LinkId id) const {
    auto it = links_.find(id);
    if (it == links_.end()) throw Error(fmt::format("unknown link #{}", id.value));
    return it->second;
}

std::span<const LinkId> KnowledgeBase::outgoing(InstanceId id) const {
    auto it = out_.find(id);
    if (it == out_.end()) return {};
    return it->second;
}

std::span<const LinkId> KnowledgeBase::incoming(InstanceId id) const {
    auto it = in_.find(id);
    if (it == in_.end()) return {};
    return it->second;
}

// -- queries -----------------------------------------------------------------

std::vector<InstanceId> KnowledgeBase::query_has(InstanceId id, ClassId attribute_class) const {
    instance(id);
    std::vector<InstanceId> out;
    for (LinkId lid : outgoing(id)) {
        const Link& l = links_.at(lid);
        if (l.type == LinkType::Has && is_a(instances_.at(l.target).cls, attribute_class)) out.push_back(l.target);
    }
    sort_unique(out);
    return out;
}

std::vector<InstanceId> KnowledgeBase::query_has(InstanceId id, std::string_view attribute_class) const {
    auto c = find_class(attribute_class);
    if (!c) throw Error(fmt::format("unknown class '{}'", attribute_class));
    return query_has(id, *c);
}

void KnowledgeBase::collect_roles(InstanceId id, RoleId r, RoleDirection direction,
                                  std::vector<InstanceId>& out) const {
    if (direction != RoleDirection::Inverse) {
        for (LinkId lid : outgoing(id)) {
            const Link& l = links_.at(lid);
            if (l.type == LinkType::Role && role_is_a(l.role, r)) out.push_back(l.target);
        }
    }
    if (direction != RoleDirection::Forward) {
        for (LinkId lid : incoming(id)) {
            const Link& l = links_.at(lid);
            if (l.type == LinkType::Role && role_is_a(l.role, r)) out.push_back(l.source);
        }
    }
}

std::vector<InstanceId> KnowledgeBase::query_role(InstanceId id, RoleId r, RoleDirection direction) const {
    instance(id);
    std::vector<InstanceId> out;
    collect_roles(id, r, direction, out);
    sort_unique(out);
    return out;
}

std::vector<InstanceId> KnowledgeBase::query_role(InstanceId id, std::string_view r,
                                                  RoleDirection direction) const {
    instance(id);
    auto rid = find_role(r);
    if (!rid) return {};
    return query_role(id, *rid, direction);
}

// -- values ------------------------------------------------------------------

const Value& KnowledgeBase::value_of(InstanceId id) const {
    if (auto it = inferred_values_.find(id); it != inferred_values_.end()) return it->second;
    return asserted_value(id);
}

const Value& KnowledgeBase::asserted_value(InstanceId id) const {
    const Instance& inst = instance(id);
    if (!inst.value) throw Error(fmt::format("instance {} is not an attribute", label(id)));
    return *inst.value;
}

Value KnowledgeBase::set_attribute_value(InstanceId id, Value value) {
    Instance& inst = mutable_instance(id);
    if (!inst.value)
        throw Error(fmt::format("cannot set a value on {} instance {}", to_string(meta_kind(id)), label(id)));
    Value previous = value_of(id);
    inst.value = normalize(std::move(value));
    inferred_values_.erase(id);
    pending_pins_.insert(id);
    dirty_ = true;
    return previous;
}

// -- inferred facts ------------------------------------------------------------

InstanceId KnowledgeBase::add_inferred_instance(ClassId cls) {
    const ConceptClass& c = get_class(cls);
    if (c.meta == MetaKind::Attribute) throw Error("inferred attribute instances are not supported");
    Instance inst;
    inst.id = next_fact();
    inst.cls = cls;
    inst.origin = Origin::Inferred;
    InstanceId id = inst.id;
    instances_.emplace(id, std::move(inst));
    return id;
}

LinkId KnowledgeBase::add_inferred_link(const LinkKind& kind, InstanceId source, InstanceId target) {
    Link l = make_link(kind, source, target);
    l.origin = Origin::Inferred;
    return insert_link(std::move(l));
}

void KnowledgeBase::set_inferred_value(InstanceId id, Value value) {
    if (!instance(id).value) throw Error(fmt::format("cannot infer a value for non-attribute {}", label(id)));
    inferred_values_[id] = normalize(std::move(value));
}

DerivationId KnowledgeBase::record_derivation(std::string rule, std::vector<FactId> premises, FactId conclusion) {
    DerivationId id{next_derivation_++};
    if (auto it = instances_.find(conclusion); it != instances_.end() && it->second.origin == Origin::Inferred)
        it->second.derivation = id;
    else if (auto lt = links_.find(conclusion); lt != links_.end() && lt->second.origin == Origin::Inferred)
        lt->second.derivation = id;
    derivations_.emplace(id, Derivation{id, std::move(rule), std::move(premises), conclusion});
    return id;
}

const Derivation& KnowledgeBase::derivation(DerivationId id) const {
    auto it = derivations_.find(id);
    if (it == derivations_.end()) throw Error(fmt::format("unknown derivation {}", id.value));
    return it->second;
}

std::optional<DerivationId> KnowledgeBase::derivation_of(FactId id) const {
    if (auto it = instances_.find(id); it != instances_.end()) return it->second.derivation;
    if (auto lt = links_.find(id); lt != links_.end()) return lt->second.derivation;
    throw Error(fmt::format("unknown fact #{}", id.value));
}

std::size_t KnowledgeBase::retract_inferred() {
    std::size_t removed = 0;
    for (auto it = links_.begin(); it != links_.end();) {
        if (it->second.origin != Origin::Inferred) {
            ++it;
            continue;
        }
        auto drop = [&](std::map<FactId, std::vector<LinkId>>& index, InstanceId key) {
            auto& v = index[key];
            v.erase(std::remove(v.begin(), v.end(), it->first), v.end());
            if (v.empty()) index.erase(key);
        };
        drop(out_, it->second.source);
        drop(in_, it->second.target);
        it = links_.erase(it);
        ++removed;
    }
    for (auto it = instances_.begin(); it != instances_.end();) {
        if (it->second.origin == Origin::Inferred) {
            it = instances_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    derivations_.clear();
    inferred_values_.clear();
    if (removed > 0) dirty_ = true;
    return removed;
}

std::size_t KnowledgeBase::begin_recompute() {
    active_pins_ = std::move(pending_pins_);
    pending_pins_.clear();
    return retract_inferred();
}

std::size_t KnowledgeBase::instance_count(std::optional<Origin> origin) const {
    if (!origin) return instances_.size();
    return static_cast<std::size_t>(std::count_if(instances_.begin(), instances_.end(),
                                                   [&](const auto& kv) { return kv.second.origin == *origin; }));
}

std::size_t KnowledgeBase::link_count(std::optional<Origin> origin) const {
    if (!origin) return links_.size();
    return static_cast<std::size_t>(
        std::count_if(links_.begin(), links_.end(), [&](const auto& kv) { return kv.second.origin == *origin; }));
}

}  // namespace selfx
