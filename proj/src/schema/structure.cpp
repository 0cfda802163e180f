#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "selfx/schema.hpp"

namespace selfx::schema {

namespace {

std::vector<InstanceId> filter_class(const KnowledgeBase& kb, std::vector<InstanceId> ids, std::string_view cls) {
    auto c = kb.find_class(cls);
    if (!c) return {};
    std::erase_if(ids, [&](InstanceId id) { return !kb.is_a(kb.instance(id).cls, *c); });
    return ids;
}

bool any_of_class(const KnowledgeBase& kb, const std::vector<InstanceId>& ids, std::string_view cls) {
    return std::any_of(ids.begin(), ids.end(), [&](InstanceId id) { return kb.is_a(kb.instance(id).cls, cls); });
}

/// First role link (by assertion order) between `a` and `b` whose role descends from `ancestor`.
std::string connecting_role(const KnowledgeBase& kb, InstanceId a, InstanceId b, std::string_view ancestor) {
    auto anc = kb.find_role(ancestor);
    if (!anc) return {};
    std::optional<LinkId> best;
    auto consider = [&](LinkId lid, InstanceId other) {
        const Link& l = kb.link(lid);
        if (l.type != LinkType::Role || other != b || !kb.role_is_a(l.role, *anc)) return;
        if (!best || lid < *best) best = lid;
    };
    for (LinkId lid : kb.outgoing(a)) consider(lid, kb.link(lid).target);
    for (LinkId lid : kb.incoming(a)) consider(lid, kb.link(lid).source);
    return best ? kb.role(kb.link(*best).role).name : std::string{};
}

}  // namespace

std::string_view abbreviation(RequireKind kind) {
    switch (kind) {
        case RequireKind::Functional: return "FR";
        case RequireKind::NonFunctional: return "NFR";
        case RequireKind::Environmental: return "ER";
    }
    return "?";
}

std::vector<InstanceId> requirements_of(const KnowledgeBase& kb, InstanceId component) {
    return filter_class(kb, kb.query_role(component, role::petitioner, RoleDirection::Both), cls::Require);
}

std::vector<InstanceId> calls_of(const KnowledgeBase& kb, InstanceId require, std::string_view call_role) {
    return filter_class(kb, kb.query_role(require, call_role, RoleDirection::Both), cls::Featuring);
}

std::vector<InstanceId> products_of(const KnowledgeBase& kb, InstanceId require) {
    return filter_class(kb, kb.query_role(require, role::product, RoleDirection::Both), cls::Creation);
}

std::vector<InstanceId> featuring_subjects(const KnowledgeBase& kb, InstanceId featuring) {
    return filter_class(kb, kb.query_role(featuring, role::subject, RoleDirection::Both), cls::Creation);
}

std::vector<InstanceId> featured_properties(const KnowledgeBase& kb, InstanceId featuring) {
    std::vector<InstanceId> out;
    if (auto prop = kb.find_class(cls::Property)) out = kb.query_has(featuring, *prop);
    for (InstanceId id : filter_class(kb, kb.query_role(featuring, role::feature, RoleDirection::Both), cls::Property))
        out.push_back(id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<InstanceId> featured_properties_of_subject(const KnowledgeBase& kb, InstanceId creation) {
    std::vector<InstanceId> out;
    for (InstanceId f : filter_class(kb, kb.query_role(creation, role::subject, RoleDirection::Both), cls::Featuring))
        for (InstanceId p : featured_properties(kb, f)) out.push_back(p);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool is_featuring_subject(const KnowledgeBase& kb, InstanceId creation) {
    return any_of_class(kb, kb.query_role(creation, role::subject, RoleDirection::Both), cls::Featuring);
}

bool is_behavior_effect(const KnowledgeBase& kb, InstanceId creation) {
    return any_of_class(kb, kb.query_role(creation, role::effect, RoleDirection::Both), cls::ProcessingRequirement);
}

bool is_component_product(const KnowledgeBase& kb, InstanceId creation) {
    return any_of_class(kb, kb.query_role(creation, role::product, RoleDirection::Both), cls::Require);
}

std::vector<Requirement> list_requirements(const KnowledgeBase& kb, InstanceId component) {
    kb.instance(component);
    std::vector<Requirement> out;
    for (InstanceId r : requirements_of(kb, component)) {
        Requirement req;
        req.relation = r;
        req.calls = calls_of(kb, r, role::call);
        if (!req.calls.empty()) req.call_role = connecting_role(kb, r, req.calls.front(), role::call);

        const ClassId c = kb.instance(r).cls;
        if (kb.is_a(c, cls::NonFunctionalRequirement))
            req.kind = RequireKind::NonFunctional;
        else if (kb.is_a(c, cls::EnvironmentalRequirement))
            req.kind = RequireKind::Environmental;
        else if (kb.is_a(c, cls::FunctionalRequirement))
            req.kind = RequireKind::Functional;
        else if (req.call_role == role::service)
            req.kind = RequireKind::NonFunctional;
        else if (req.call_role == role::state)
            req.kind = RequireKind::Environmental;

        auto products = products_of(kb, r);
        if (!products.empty()) {
            req.product = products.front();
            req.product_role = connecting_role(kb, r, *req.product, role::product);
        }
        out.push_back(std::move(req));
    }
    return out;
}

// -- property constraints ----------------------------------------------------

namespace {

void push_numeric(const Value& v, std::vector<double>& out) {
    if (const double* d = std::get_if<double>(&v))
        out.push_back(*d);
    else if (is_nan(v))
        out.push_back(std::nan(""));
}

}  // namespace

Constraints constraints_of(const KnowledgeBase& kb, InstanceId property) {
    Constraints c;
    push_numeric(kb.value_of(property), c.exact);
    for (InstanceId e : kb.query_has(property, cls::Exact)) push_numeric(kb.value_of(e), c.exact);
    for (InstanceId m : kb.query_has(property, cls::Min)) push_numeric(kb.value_of(m), c.min);
    for (InstanceId m : kb.query_has(property, cls::Max)) push_numeric(kb.value_of(m), c.max);
    return c;
}

std::vector<double> amounts_of(const KnowledgeBase& kb, InstanceId property) {
    std::vector<double> out;
    push_numeric(kb.value_of(property), out);
    for (InstanceId e : kb.query_has(property, cls::Exact)) push_numeric(kb.value_of(e), out);
    return out;
}

bool satisfies(const Constraints& c, double amount) {
    for (double e : c.exact)
        if (!(std::abs(amount - e) <= exact_tolerance)) return false;
    for (double m : c.min)
        if (!(amount >= m)) return false;
    for (double m : c.max)
        if (!(amount <= m)) return false;
    return true;
}

std::optional<std::string> text_of(const KnowledgeBase& kb, InstanceId property) {
    if (const auto* s = std::get_if<std::string>(&kb.value_of(property))) return *s;
    return std::nullopt;
}

bool property_matches(const KnowledgeBase& kb, InstanceId featured, InstanceId provided) {
    if (!kb.is_a(kb.instance(provided).cls, kb.instance(featured).cls)) return false;
    const Value& fv = kb.value_of(featured);
    const Value& pv = kb.value_of(provided);
    if (is_text(fv) && fv != pv) return false;
    if (is_bool(fv) && fv != pv) return false;
    Constraints c = constraints_of(kb, featured);
    if (c.empty()) return true;
    auto amounts = amounts_of(kb, provided);
    if (amounts.empty()) return false;
    return std::all_of(amounts.begin(), amounts.end(), [&](double a) { return satisfies(c, a); });
}

// -- validation ------------------------------------------------------------

namespace {

struct Pattern {
    std::string_view component;
    std::string_view require;
    std::string_view call_role;
    std::string_view call_kind;  // creation class featured by the call
    std::string_view product_role;
    std::string_view product_kind;
};

constexpr Pattern kPatterns[] = {
    {cls::Sensor, cls::EnvironmentalRequirement, role::state, cls::PhysicalPhenomena, role::outcome, cls::Data},
    {cls::Actuator, cls::FunctionalRequirement, role::input, cls::Data, role::output, cls::PhysicalPhenomena},
    {cls::Functional, cls::FunctionalRequirement, role::input, cls::Data, role::output, cls::Data},
    {cls::Appliance, cls::Require, role::call, cls::Creation, role::product, cls::Resource},
};

bool call_features(const KnowledgeBase& kb, InstanceId require, std::string_view call_role, std::string_view kind) {
    for (InstanceId f : calls_of(kb, require, call_role))
        if (any_of_class(kb, featuring_subjects(kb, f), kind)) return true;
    return false;
}

}  // namespace

ValidationReport validate_component(const KnowledgeBase& kb, InstanceId component) {
    const Instance& c = kb.instance(component);
    if (!kb.is_a(c.cls, cls::Component))
        throw Error(fmt::format("{} of class '{}' is not a component", kb.label(component), kb.get_class(c.cls).name));

    ValidationReport report{component, {}};
    auto add = [&](std::string rule, std::string msg) { report.violations.push_back({std::move(rule), std::move(msg)}); };

    const auto reqs = requirements_of(kb, component);
    if (reqs.empty()) add("require-present", fmt::format("{} petitions no requirement", kb.label(component)));

    for (const Pattern& p : kPatterns) {
        if (!kb.is_a(c.cls, p.component)) continue;
        bool found = false;
        for (InstanceId r : reqs) {
            if (!kb.is_a(kb.instance(r).cls, p.require)) continue;
            bool call_ok = p.component == cls::Appliance || call_features(kb, r, p.call_role, p.call_kind);
            auto products = filter_class(kb, kb.query_role(r, p.product_role, RoleDirection::Both), p.product_kind);
            if (call_ok && !products.empty()) found = true;
        }
        if (!found)
            add("kind-pattern",
                p.component == cls::Appliance
                    ? fmt::format("{} produces no {}", kb.label(component), p.product_kind)
                    : fmt::format("{} lacks a {} with a {} {} and a {} {}", kb.label(component), p.require, p.call_kind,
                                  p.call_role, p.product_kind, p.product_role));
        for (InstanceId r : reqs)
            for (InstanceId prod : products_of(kb, r))
                if (!kb.is_a(kb.instance(prod).cls, p.product_kind))
                    add("kind-pattern", fmt::format("{} product {} is a {}, expected {}", p.component, kb.label(prod),
                                                    kb.get_class(kb.instance(prod).cls).name, p.product_kind));
    }

    for (InstanceId r : reqs) {
        if (products_of(kb, r).size() != 1)
            add("single-product", fmt::format("requirement {} must bind exactly one product", kb.label(r)));
        for (InstanceId f : calls_of(kb, r, role::call))
            if (featured_properties(kb, f).empty())
                add("featured-call", fmt::format("featuring {} used by {} features no property", kb.label(f),
                                                 kb.label(r)));
    }
    return report;
}

}  // namespace selfx::schema
