#pragma once

#include <chrono>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "selfx/kb.hpp"

namespace selfx::inference {

namespace rule {
inline constexpr std::string_view realize_data = "realize-data";
inline constexpr std::string_view realize_resource = "realize-resource";
inline constexpr std::string_view realize_phenomena = "realize-phenomena";
inline constexpr std::string_view infer_health = "infer-health";
inline constexpr std::string_view processing = "processing";
inline constexpr std::string_view processing_transitive = "processing-transitive";
}  // namespace rule

/// Rule names in evaluation order.
const std::vector<std::string>& rule_names();

struct Diagnostic {
    enum class Severity { Warning, Note };
    Severity severity = Severity::Warning;
    std::string code;  // "over-commitment", "dangling-featuring"
    std::string message;
};

/// Throughput bookkeeping for one provided resource.
struct LedgerEntry {
    InstanceId provider;
    double committed_throughput = 0.0;
    std::optional<double> capacity;
    std::optional<double> throughput;
    std::optional<double> remaining_time;  // capacity / throughput
    std::vector<InstanceId> requesters;
};

using ResourceLedger = std::map<InstanceId, LedgerEntry>;

/// capacity / throughput. Throws std::domain_error when throughput is not positive.
double remaining_time(double capacity, double throughput);

struct FixpointStats {
    std::size_t rounds = 0;
    std::map<std::string, std::size_t> facts_added;  // per rule
    std::chrono::nanoseconds wall_time{0};
    std::size_t retracted = 0;
    std::vector<Diagnostic> diagnostics;
    ResourceLedger ledger;

    std::size_t total_added() const;
};

// Individual rules. Each inserts what the current facts support and returns
// the number of new facts (relation instances; realize-data also counts the
// location it attaches, infer-health counts value changes).
std::size_t infer_realizing_data(KnowledgeBase& kb);
std::size_t infer_realizing_resource(KnowledgeBase& kb, ResourceLedger* ledger = nullptr,
                                     std::vector<Diagnostic>* diagnostics = nullptr);
std::size_t infer_realizing_phenomena(KnowledgeBase& kb);
std::size_t infer_health(KnowledgeBase& kb);
std::size_t infer_processing(KnowledgeBase& kb);
std::size_t infer_transitive(KnowledgeBase& kb);

/// Rule predicates on a single (requester, provider) pair. On success the
/// facts the match rests on are written to `premises`.
bool data_pair_matches(const KnowledgeBase& kb, InstanceId requester, InstanceId provider,
                       std::vector<FactId>* premises = nullptr);
/// `kinds` are the featured property classes that must each find a matching
/// provider attribute.
bool quantity_pair_matches(const KnowledgeBase& kb, InstanceId requester, InstanceId provider,
                           std::initializer_list<std::string_view> kinds, std::vector<FactId>* premises = nullptr);

/// Runs the rules to a fixpoint. A knowledge base changed since the last run
/// is first cleared of inferred facts; otherwise the rules run over the
/// existing facts and a current knowledge base gains nothing.
FixpointStats infer_to_fixpoint(KnowledgeBase& kb);

/// Ledger of the current Realizing relations, recomputed from the knowledge base.
ResourceLedger resource_ledger(const KnowledgeBase& kb, std::vector<Diagnostic>* diagnostics = nullptr);

// -- provenance --------------------------------------------------------------

struct ExplainNode {
    FactId fact;
    std::string label;
    std::optional<std::string> rule;  // absent for asserted leaves
    std::vector<ExplainNode> premises;
};

/// Derivation tree of a fact down to asserted facts. An asserted fact is a
/// leaf. Throws for an unknown id.
ExplainNode explain(const KnowledgeBase& kb, FactId fact);
std::string render(const ExplainNode& node);

/// Derivations as JSON lines: {"rule":..., "premises":[...], "conclusion":...}.
void export_trace(const KnowledgeBase& kb, std::ostream& out);

// -- processing views ----------------------------------------------------------

struct ProcessingView {
    InstanceId relation;
    std::vector<InstanceId> executors;  // chain order
    std::vector<InstanceId> inputs;
    InstanceId output;
    bool composite = false;
};

std::vector<ProcessingView> processing_relations(const KnowledgeBase& kb);
ProcessingView processing_view(const KnowledgeBase& kb, InstanceId relation);

/// Requesters realized by at least one provider.
bool is_realized(const KnowledgeBase& kb, InstanceId requester);
std::vector<InstanceId> providers_of(const KnowledgeBase& kb, InstanceId requester);

/// One-line description of a fact for reports.
std::string describe(const KnowledgeBase& kb, FactId fact);

}  // namespace selfx::inference
