#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "selfx/inference.hpp"
#include "selfx/schema.hpp"

namespace selfx::inference {

namespace cls = schema::cls;
namespace role = schema::role;

namespace {

/// Targets of `source`'s outgoing role links of exactly `role_name`, in link order.
std::vector<InstanceId> ordered_targets(const KnowledgeBase& kb, InstanceId source, std::string_view role_name) {
    std::vector<InstanceId> out;
    auto r = kb.find_role(role_name);
    if (!r) return out;
    for (LinkId lid : kb.outgoing(source)) {
        const Link& l = kb.link(lid);
        if (l.type == LinkType::Role && l.role == *r) out.push_back(l.target);
    }
    return out;
}

std::vector<InstanceId> of_class(const KnowledgeBase& kb, std::vector<InstanceId> ids, std::string_view c) {
    std::erase_if(ids, [&](InstanceId id) { return !kb.is_a(kb.instance(id).cls, c); });
    return ids;
}

void sort_unique(std::vector<InstanceId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Requested (featured) and provided creations of a kind. Behavior effects
/// are neither: they are matched against Processing outputs by mission queries.
struct Candidates {
    std::vector<InstanceId> requesters;
    std::vector<InstanceId> providers;
};

Candidates candidates(const KnowledgeBase& kb, std::string_view kind) {
    Candidates c;
    for (InstanceId id : kb.instances_of(kind)) {
        if (schema::is_behavior_effect(kb, id)) continue;
        if (schema::is_featuring_subject(kb, id))
            c.requesters.push_back(id);
        else
            c.providers.push_back(id);
    }
    return c;
}

std::set<std::pair<InstanceId, InstanceId>> realized_pairs(const KnowledgeBase& kb) {
    std::set<std::pair<InstanceId, InstanceId>> out;
    for (InstanceId r : kb.instances_of(cls::Realizing)) {
        auto req = kb.query_role(r, role::requester);
        auto prov = kb.query_role(r, role::provider);
        for (InstanceId a : req)
            for (InstanceId b : prov) out.emplace(a, b);
    }
    return out;
}

InstanceId insert_realizing(KnowledgeBase& kb, std::string_view rule_name, InstanceId requester, InstanceId provider,
                            std::vector<FactId> premises) {
    InstanceId rel = kb.add_inferred_instance(kb.class_id(cls::Realizing));
    kb.add_inferred_link(LinkKind::role(std::string(role::requester)), rel, requester);
    kb.add_inferred_link(LinkKind::role(std::string(role::provider)), rel, provider);
    kb.record_derivation(std::string(rule_name), std::move(premises), rel);
    return rel;
}

std::vector<InstanceId> featured_of_kind(const KnowledgeBase& kb, InstanceId requester,
                                         std::initializer_list<std::string_view> kinds) {
    std::vector<InstanceId> out;
    for (InstanceId p : schema::featured_properties_of_subject(kb, requester))
        for (auto k : kinds)
            if (kb.is_a(kb.instance(p).cls, k)) {
                out.push_back(p);
                break;
            }
    return out;
}

std::vector<InstanceId> featurings_of(const KnowledgeBase& kb, InstanceId subject) {
    return of_class(kb, kb.query_role(subject, role::subject, RoleDirection::Inverse), cls::Featuring);
}

// -- data ----------------------------------------------------------------------

std::set<std::string> texts(const KnowledgeBase& kb, const std::vector<InstanceId>& props) {
    std::set<std::string> out;
    for (InstanceId p : props)
        if (auto t = schema::text_of(kb, p)) out.insert(*t);
    return out;
}

}  // namespace

bool data_pair_matches(const KnowledgeBase& kb, InstanceId requester, InstanceId provider,
                       std::vector<FactId>* premises) {
    auto featured_formats = featured_of_kind(kb, requester, {cls::Format});
    auto provided_formats = kb.query_has(provider, cls::Format);
    std::optional<InstanceId> format_match;
    auto wanted = texts(kb, featured_formats);
    for (InstanceId f : provided_formats) {
        auto t = schema::text_of(kb, f);
        if (t && wanted.contains(*t)) {
            format_match = f;
            break;
        }
    }
    if (!format_match) return false;

    schema::Constraints rate;
    for (InstanceId r : featured_of_kind(kb, requester, {cls::Rate})) {
        auto c = schema::constraints_of(kb, r);
        rate.exact.insert(rate.exact.end(), c.exact.begin(), c.exact.end());
        rate.min.insert(rate.min.end(), c.min.begin(), c.min.end());
        rate.max.insert(rate.max.end(), c.max.begin(), c.max.end());
    }
    std::optional<InstanceId> rate_attr;
    if (!rate.empty()) {
        auto rates = kb.query_has(provider, cls::Rate);
        if (rates.size() != 1) return false;
        auto amounts = schema::amounts_of(kb, rates.front());
        if (amounts.size() != 1 || !schema::satisfies(rate, amounts.front())) return false;
        rate_attr = rates.front();
    }

    if (premises) {
        *premises = {requester, provider};
        for (InstanceId f : featurings_of(kb, requester)) premises->push_back(f);
        premises->push_back(*format_match);
        if (rate_attr) premises->push_back(*rate_attr);
    }
    return true;
}

bool quantity_pair_matches(const KnowledgeBase& kb, InstanceId requester, InstanceId provider,
                           std::initializer_list<std::string_view> kinds, std::vector<FactId>* premises) {
    if (!kb.is_a(kb.instance(provider).cls, kb.instance(requester).cls)) return false;
    std::vector<FactId> used;
    for (InstanceId featured : featured_of_kind(kb, requester, kinds)) {
        std::optional<InstanceId> match;
        for (LinkId lid : kb.outgoing(provider)) {
            const Link& l = kb.link(lid);
            if (l.type == LinkType::Has && l.origin == Origin::Asserted &&
                schema::property_matches(kb, featured, l.target)) {
                match = l.target;
                break;
            }
        }
        if (!match) return false;
        used.push_back(*match);
    }
    if (premises) {
        *premises = {requester, provider};
        for (InstanceId f : featurings_of(kb, requester)) premises->push_back(f);
        premises->insert(premises->end(), used.begin(), used.end());
    }
    return true;
}

std::size_t infer_realizing_data(KnowledgeBase& kb) {
    auto done = realized_pairs(kb);
    auto c = candidates(kb, cls::Data);
    std::size_t added = 0;
    for (InstanceId req : c.requesters) {
        for (InstanceId prov : c.providers) {
            if (done.contains({req, prov})) continue;
            std::vector<FactId> premises;
            if (!data_pair_matches(kb, req, prov, &premises)) continue;
            InstanceId rel = insert_realizing(kb, rule::realize_data, req, prov, std::move(premises));
            done.emplace(req, prov);
            ++added;
            // The requester now also has the provider's location.
            auto current = kb.query_has(req, cls::Location);
            for (InstanceId loc : kb.query_has(prov, cls::Location)) {
                if (std::find(current.begin(), current.end(), loc) != current.end()) continue;
                LinkId l = kb.add_inferred_link(
                    LinkKind::has(kb.get_class(kb.instance(loc).cls).name), req, loc);
                kb.record_derivation(std::string(rule::realize_data), {rel, loc}, l);
                ++added;
            }
        }
    }
    return added;
}

namespace {

std::size_t realize_quantities(KnowledgeBase& kb, std::string_view kind, std::string_view rule_name,
                               std::initializer_list<std::string_view> featured_kinds) {
    auto done = realized_pairs(kb);
    auto c = candidates(kb, kind);
    std::size_t added = 0;
    for (InstanceId req : c.requesters) {
        for (InstanceId prov : c.providers) {
            if (done.contains({req, prov})) continue;
            std::vector<FactId> premises;
            if (!quantity_pair_matches(kb, req, prov, featured_kinds, &premises)) continue;
            insert_realizing(kb, rule_name, req, prov, std::move(premises));
            done.emplace(req, prov);
            ++added;
        }
    }
    return added;
}

}  // namespace

std::size_t infer_realizing_resource(KnowledgeBase& kb, ResourceLedger* ledger, std::vector<Diagnostic>* diagnostics) {
    std::size_t added = realize_quantities(kb, cls::Resource, rule::realize_resource,
                                           {cls::PhysicalQuantity, cls::Throughput, cls::Capacity});
    if (ledger) *ledger = resource_ledger(kb, diagnostics);
    return added;
}

std::size_t infer_realizing_phenomena(KnowledgeBase& kb) {
    return realize_quantities(kb, cls::PhysicalPhenomena, rule::realize_phenomena, {cls::PhysicalQuantity});
}

// -- realization queries -------------------------------------------------------

std::vector<InstanceId> providers_of(const KnowledgeBase& kb, InstanceId requester) {
    std::vector<InstanceId> out;
    for (InstanceId r : of_class(kb, kb.query_role(requester, role::requester, RoleDirection::Inverse), cls::Realizing))
        for (InstanceId p : kb.query_role(r, role::provider)) out.push_back(p);
    sort_unique(out);
    return out;
}

bool is_realized(const KnowledgeBase& kb, InstanceId requester) {
    return !of_class(kb, kb.query_role(requester, role::requester, RoleDirection::Inverse), cls::Realizing).empty();
}

namespace {

std::vector<InstanceId> realizings_of(const KnowledgeBase& kb, InstanceId requester) {
    return of_class(kb, kb.query_role(requester, role::requester, RoleDirection::Inverse), cls::Realizing);
}

std::vector<InstanceId> call_subjects(const KnowledgeBase& kb, InstanceId require, std::string_view call_role) {
    std::vector<InstanceId> out;
    for (InstanceId f : schema::calls_of(kb, require, call_role))
        for (InstanceId s : schema::featuring_subjects(kb, f)) out.push_back(s);
    sort_unique(out);
    return out;
}

bool health_false(const KnowledgeBase& kb, InstanceId attr) {
    const Value& v = kb.value_of(attr);
    if (const bool* b = std::get_if<bool>(&v)) return !*b;
    if (const auto* s = std::get_if<std::string>(&v)) return *s == "False" || *s == "false";
    return false;
}

}  // namespace

// -- health ----------------------------------------------------------------------

std::size_t infer_health(KnowledgeBase& kb) {
    std::size_t changed = 0;
    for (InstanceId comp : kb.instances_of(cls::Component)) {
        auto health = kb.query_has(comp, cls::HealthState);
        if (health.empty()) continue;

        bool ok = true;
        std::vector<FactId> premises;
        for (InstanceId r : schema::requirements_of(kb, comp)) {
            auto needed = call_subjects(kb, r, role::service);
            for (InstanceId s : call_subjects(kb, r, role::state)) needed.push_back(s);
            if (needed.empty()) continue;
            premises.push_back(r);
            for (InstanceId s : needed) {
                auto rs = realizings_of(kb, s);
                if (rs.empty()) ok = false;
                premises.insert(premises.end(), rs.begin(), rs.end());
            }
        }

        for (InstanceId h : health) {
            if (kb.is_pinned(h)) continue;
            Value next = is_text(kb.asserted_value(h)) ? Value{std::string(ok ? "True" : "False")} : Value{ok};
            if (kb.value_of(h) == next) continue;
            kb.set_inferred_value(h, next);
            kb.record_derivation(std::string(rule::infer_health), premises, h);
            ++changed;
        }
    }
    return changed;
}

// -- processing ----------------------------------------------------------------

ProcessingView processing_view(const KnowledgeBase& kb, InstanceId relation) {
    if (!kb.is_a(kb.instance(relation).cls, cls::Processing))
        throw Error(fmt::format("{} is not a Processing relation", kb.label(relation)));
    ProcessingView v;
    v.relation = relation;
    v.executors = ordered_targets(kb, relation, role::executor);
    v.inputs = ordered_targets(kb, relation, role::input);
    auto outs = ordered_targets(kb, relation, role::output);
    if (outs.size() != 1) throw Error(fmt::format("Processing {} has {} outputs", kb.label(relation), outs.size()));
    v.output = outs.front();
    v.composite = v.executors.size() > 1;
    return v;
}

std::vector<ProcessingView> processing_relations(const KnowledgeBase& kb) {
    std::vector<ProcessingView> out;
    for (InstanceId p : kb.instances_of(cls::Processing)) out.push_back(processing_view(kb, p));
    return out;
}

namespace {

InstanceId insert_processing(KnowledgeBase& kb, std::string_view rule_name, const std::vector<InstanceId>& executors,
                             const std::vector<InstanceId>& inputs, InstanceId output, std::vector<FactId> premises) {
    InstanceId rel = kb.add_inferred_instance(kb.class_id(cls::Processing));
    for (InstanceId e : executors) kb.add_inferred_link(LinkKind::role(std::string(role::executor)), rel, e);
    for (InstanceId i : inputs) kb.add_inferred_link(LinkKind::role(std::string(role::input)), rel, i);
    kb.add_inferred_link(LinkKind::role(std::string(role::output)), rel, output);
    kb.record_derivation(std::string(rule_name), std::move(premises), rel);
    return rel;
}

}  // namespace

std::size_t infer_processing(KnowledgeBase& kb) {
    std::set<std::pair<InstanceId, InstanceId>> done;  // (executor, output)
    for (const auto& v : processing_relations(kb))
        if (!v.composite) done.emplace(v.executors.front(), v.output);

    std::size_t added = 0;
    for (InstanceId comp : kb.instances_of(cls::Component)) {
        const ClassId c = kb.instance(comp).cls;
        if (!kb.is_a(c, cls::Sensor) && !kb.is_a(c, cls::Actuator) && !kb.is_a(c, cls::Functional)) continue;

        auto health = kb.query_has(comp, cls::HealthState);
        if (std::any_of(health.begin(), health.end(), [&](InstanceId h) { return health_false(kb, h); })) continue;

        auto reqs = schema::requirements_of(kb, comp);
        std::vector<InstanceId> products;
        for (InstanceId r : reqs)
            for (InstanceId p : schema::products_of(kb, r))
                if (!kb.is_a(kb.instance(p).cls, cls::Resource)) products.push_back(p);
        sort_unique(products);

        for (InstanceId product : products) {
            if (done.contains({comp, product})) continue;
            bool ok = true;
            std::vector<FactId> premises;
            std::vector<InstanceId> inputs;
            for (InstanceId r : reqs) {
                auto ps = schema::products_of(kb, r);
                if (std::find(ps.begin(), ps.end(), product) == ps.end()) continue;
                premises.push_back(r);
                for (InstanceId s : call_subjects(kb, r, role::call)) {
                    auto rs = realizings_of(kb, s);
                    if (rs.empty()) ok = false;
                    premises.insert(premises.end(), rs.begin(), rs.end());
                }
                for (InstanceId s : call_subjects(kb, r, role::input)) inputs.push_back(s);
                for (InstanceId s : call_subjects(kb, r, role::state)) inputs.push_back(s);
            }
            if (!ok) continue;
            sort_unique(inputs);
            premises.insert(premises.end(), health.begin(), health.end());
            insert_processing(kb, rule::processing, {comp}, inputs, product, std::move(premises));
            done.emplace(comp, product);
            ++added;
        }
    }
    return added;
}

namespace {

/// Base Processing relations a (possibly composite) Processing is chained from.
std::vector<InstanceId> chain_of(const KnowledgeBase& kb, InstanceId processing) {
    auto d = kb.derivation_of(processing);
    if (!d) return {processing};
    const Derivation& der = kb.derivation(*d);
    if (der.rule != rule::processing_transitive || der.premises.size() < 2) return {processing};
    auto head = chain_of(kb, der.premises[0]);
    head.push_back(der.premises[1]);
    return head;
}

}  // namespace

std::size_t infer_transitive(KnowledgeBase& kb) {
    std::size_t added = 0;
    std::set<std::vector<InstanceId>> chains;
    for (const auto& v : processing_relations(kb))
        if (v.composite) chains.insert(chain_of(kb, v.relation));

    for (;;) {
        auto all = processing_relations(kb);
        std::vector<ProcessingView> bases;
        for (const auto& v : all)
            if (!v.composite) bases.push_back(v);

        std::size_t round = 0;
        for (const auto& first : all) {
            auto head_chain = chain_of(kb, first.relation);
            for (const auto& second : bases) {
                InstanceId exec = second.executors.front();
                if (std::find(first.executors.begin(), first.executors.end(), exec) != first.executors.end()) continue;
                auto chain = head_chain;
                chain.push_back(second.relation);
                if (chains.contains(chain)) continue;

                // A Realizing whose provider is the first output and whose
                // requester feeds the second relation.
                std::optional<InstanceId> bridge;
                for (InstanceId r : of_class(kb, kb.query_role(first.output, role::provider, RoleDirection::Inverse),
                                             cls::Realizing)) {
                    for (InstanceId req : kb.query_role(r, role::requester))
                        if (std::find(second.inputs.begin(), second.inputs.end(), req) != second.inputs.end()) {
                            bridge = r;
                            break;
                        }
                    if (bridge) break;
                }
                if (!bridge) continue;

                auto executors = first.executors;
                executors.push_back(exec);
                insert_processing(kb, rule::processing_transitive, executors, first.inputs, second.output,
                                  {first.relation, second.relation, *bridge});
                chains.insert(std::move(chain));
                ++round;
            }
        }
        added += round;
        if (round == 0) return added;
    }
}

// -- ledger ----------------------------------------------------------------------

double remaining_time(double capacity, double throughput) {
    if (!(throughput > 0.0)) throw std::domain_error("throughput must be positive");
    return capacity / throughput;
}

namespace {

std::optional<double> first_amount(const KnowledgeBase& kb, InstanceId owner, std::string_view kind) {
    for (InstanceId a : kb.query_has(owner, kind)) {
        auto amounts = schema::amounts_of(kb, a);
        if (!amounts.empty()) return amounts.front();
    }
    return std::nullopt;
}

/// Throughput a requester commits: its featured Exact amount, else its largest Min.
double committed_by(const KnowledgeBase& kb, InstanceId requester) {
    double total = 0.0;
    for (InstanceId p : featured_of_kind(kb, requester, {cls::Throughput})) {
        auto c = schema::constraints_of(kb, p);
        if (!c.exact.empty())
            total += c.exact.front();
        else if (!c.min.empty())
            total += *std::max_element(c.min.begin(), c.min.end());
    }
    return total;
}

}  // namespace

ResourceLedger resource_ledger(const KnowledgeBase& kb, std::vector<Diagnostic>* diagnostics) {
    ResourceLedger ledger;
    for (InstanceId r : kb.instances_of(cls::Realizing)) {
        for (InstanceId prov : kb.query_role(r, role::provider)) {
            if (!kb.is_a(kb.instance(prov).cls, cls::Resource)) continue;
            auto& e = ledger[prov];
            e.provider = prov;
            for (InstanceId req : kb.query_role(r, role::requester)) e.requesters.push_back(req);
        }
    }
    for (auto& [prov, e] : ledger) {
        sort_unique(e.requesters);
        for (InstanceId req : e.requesters) e.committed_throughput += committed_by(kb, req);
        e.capacity = first_amount(kb, prov, cls::Capacity);
        e.throughput = first_amount(kb, prov, cls::Throughput);
        if (e.capacity && e.throughput && *e.throughput > 0.0) e.remaining_time = remaining_time(*e.capacity, *e.throughput);
        if (diagnostics && e.throughput && e.committed_throughput > *e.throughput)
            diagnostics->push_back({Diagnostic::Severity::Warning, "over-commitment",
                                    fmt::format("resource {} commits {} of throughput {}", kb.label(prov),
                                                format_double(e.committed_throughput), format_double(*e.throughput))});
    }
    return ledger;
}

}  // namespace selfx::inference
