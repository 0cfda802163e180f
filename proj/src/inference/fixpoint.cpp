#include <chrono>

#include <fmt/format.h>
#include "json.hpp"

#include "selfx/inference.hpp"
#include "selfx/schema.hpp"

namespace selfx::inference {

const std::vector<std::string>& rule_names() {
    static const std::vector<std::string> names = {
        std::string(rule::realize_data), std::string(rule::realize_resource), std::string(rule::realize_phenomena),
        std::string(rule::infer_health), std::string(rule::processing),       std::string(rule::processing_transitive),
    };
    return names;
}

std::size_t FixpointStats::total_added() const {
    std::size_t n = 0;
    for (const auto& [_, k] : facts_added) n += k;
    return n;
}

FixpointStats infer_to_fixpoint(KnowledgeBase& kb) {
    const auto start = std::chrono::steady_clock::now();
    FixpointStats stats;
    for (const auto& r : rule_names()) stats.facts_added[r] = 0;
    if (kb.dirty()) stats.retracted = kb.begin_recompute();

    for (;;) {
        ++stats.rounds;
        std::size_t round = 0;
        auto run = [&](std::string_view name, std::size_t n) {
            stats.facts_added[std::string(name)] += n;
            round += n;
        };
        run(rule::realize_data, infer_realizing_data(kb));
        run(rule::realize_resource, infer_realizing_resource(kb));
        run(rule::realize_phenomena, infer_realizing_phenomena(kb));
        run(rule::infer_health, infer_health(kb));
        run(rule::processing, infer_processing(kb));
        run(rule::processing_transitive, infer_transitive(kb));
        if (round == 0) break;
    }

    stats.ledger = resource_ledger(kb, &stats.diagnostics);
    if (kb.find_class(schema::cls::Featuring))
        for (InstanceId f : kb.instances_of(schema::cls::Featuring))
            if (schema::featuring_subjects(kb, f).empty())
                stats.diagnostics.push_back({Diagnostic::Severity::Warning, "dangling-featuring",
                                             fmt::format("featuring {} has no subject", kb.label(f))});
    kb.mark_clean();
    stats.wall_time = std::chrono::steady_clock::now() - start;
    return stats;
}

// -- provenance --------------------------------------------------------------

std::string describe(const KnowledgeBase& kb, FactId fact) {
    if (kb.is_link(fact)) {
        const Link& l = kb.link(fact);
        std::string kind = l.type == LinkType::Role ? kb.role(l.role).name : "has" + kb.get_class(l.has_cls).name;
        return fmt::format("link #{} {} -{}-> {}", fact.value, kb.label(l.source), kind, kb.label(l.target));
    }
    const Instance& inst = kb.instance(fact);
    const std::string& cls = kb.get_class(inst.cls).name;
    std::string head = inst.name.empty() ? fmt::format("#{} {}", fact.value, cls)
                                         : fmt::format("#{} {} {}", fact.value, cls, inst.name);
    if (inst.value) return fmt::format("{} = {}", head, display(kb.value_of(fact)));
    if (kb.meta_kind(fact) != MetaKind::Relation) return head;

    std::vector<std::string> parts;
    std::string current;
    for (LinkId lid : kb.outgoing(fact)) {
        const Link& l = kb.link(lid);
        if (l.type != LinkType::Role) continue;
        const std::string& r = kb.role(l.role).name;
        if (r != current) {
            parts.push_back(fmt::format("{}: {}", r, kb.label(l.target)));
            current = r;
        } else {
            parts.back() += fmt::format(", {}", kb.label(l.target));
        }
    }
    return parts.empty() ? head : fmt::format("{} ({})", head, fmt::join(parts, "; "));
}

ExplainNode explain(const KnowledgeBase& kb, FactId fact) {
    if (!kb.contains(fact)) throw Error(fmt::format("unknown fact #{}", fact.value));
    ExplainNode node{fact, describe(kb, fact), std::nullopt, {}};
    auto d = kb.derivation_of(fact);
    bool inferred = kb.is_instance(fact) ? kb.instance(fact).origin == Origin::Inferred
                                         : kb.link(fact).origin == Origin::Inferred;
    if (!inferred) return node;
    if (d) {
        const Derivation& der = kb.derivation(*d);
        node.rule = der.rule;
        for (FactId p : der.premises) node.premises.push_back(explain(kb, p));
    } else if (kb.is_link(fact)) {
        // a role link of an inferred relation stands on the relation
        ExplainNode owner = explain(kb, kb.link(fact).source);
        node.rule = owner.rule;
        node.premises.push_back(std::move(owner));
    }
    return node;
}

namespace {

void render_into(const ExplainNode& n, std::size_t depth, std::string& out) {
    out += std::string(depth * 2, ' ');
    out += n.label;
    out += n.rule ? fmt::format("  <= {}", *n.rule) : std::string("  [asserted]");
    out += '\n';
    for (const auto& p : n.premises) render_into(p, depth + 1, out);
}

}  // namespace

std::string render(const ExplainNode& node) {
    std::string out;
    render_into(node, 0, out);
    return out;
}

void export_trace(const KnowledgeBase& kb, std::ostream& out) {
    for (const auto& [id, d] : kb.derivations()) {
        nlohmann::json j;
        j["rule"] = d.rule;
        j["premises"] = nlohmann::json::array();
        for (FactId p : d.premises) j["premises"].push_back(p.value);
        j["conclusion"] = d.conclusion.value;
        out << j.dump() << '\n';
    }
}

}  // namespace selfx::inference
