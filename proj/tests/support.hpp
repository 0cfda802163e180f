#pragma once

// Fixtures, generators and independent oracles shared by the unit tests and
// the acceptance binary.

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "selfx/assess.hpp"
#include "selfx/kb.hpp"

namespace selfx::testing {

std::string scenario_path(const std::string& file);
std::string read_file(const std::string& path);

/// Fresh knowledge base with the conditions vocabulary and the given scenario
/// files loaded in order.
KnowledgeBase load_scenarios(const std::vector<std::string>& files);

/// Every scenario file, each preceded by the files it depends on.
std::vector<std::vector<std::string>> scenario_sequences();

/// Asserted facts rendered without fact ids: instances by class, value, bound
/// name and owned attribute tree; links by kind and endpoint renderings.
/// Names generated by the printer for unnamed instances (`_<id>`) are ignored.
std::multiset<std::string> asserted_facts(const KnowledgeBase& kb);

using Pair = std::pair<InstanceId, InstanceId>;

/// (requester, provider) pairs of the Realizing relations in `kb`.
std::set<Pair> realized_pairs(const KnowledgeBase& kb);

/// Random creations with featured requests. `expected` is computed from the
/// generator's own parameters, not from the knowledge base.
struct RealizingCase {
    KnowledgeBase kb;
    std::set<Pair> expected;
    std::size_t creations = 0;
    std::size_t requests = 0;
};
RealizingCase random_realizing_case(std::uint64_t seed, std::size_t max_creations = 20,
                                    std::size_t max_requests = 10);

/// Functional components wired by data: an edge i -> j means component i's
/// output realizes component j's input. `sourced[i]` adds an environment
/// provider for component i's input.
struct ChainCase {
    KnowledgeBase kb;
    std::vector<InstanceId> components;
    std::set<std::vector<InstanceId>> expected_composites;  // executor sequences
};
ChainCase chain_case(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                     const std::vector<bool>& sourced);
/// Random DAG on at most `max_components` components.
ChainCase random_chain_case(std::uint64_t seed, std::size_t max_components = 10);

/// Executor sequences of the composite Processing relations in `kb`.
std::multiset<std::vector<InstanceId>> composite_sequences(const KnowledgeBase& kb);

/// Two Gaussian clusters in two features, `per_cluster` records each, with
/// centroids `separation` pooled standard deviations apart. Outcomes are 0 in
/// the first cluster and 1 in the second.
struct ClusterData {
    std::vector<assess::ExperienceRecord> records;
    std::vector<std::vector<double>> held_out[2];
    double centroid[2][2];
};
ClusterData two_clusters(std::uint64_t seed, std::size_t per_cluster, double separation, std::size_t held_out);

/// Standard normal draw (Box-Muller) from the library generator.
double normal(assess::Rng& rng);

}  // namespace selfx::testing
