#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfx/assess.hpp"
#include "selfx/kb.hpp"
#include "selfx/sxdl.hpp"

namespace selfx::mission {

/// Raised by queries that need a current fixpoint on a knowledge base that
/// changed since the last inference run.
class StaleError : public Error {
public:
    StaleError() : Error("knowledge base changed since the last inference run; run infer first") {}
};

struct Behavior {
    std::string name;
    std::string effect_class;
    InstanceId behavior;
    InstanceId effect;
    InstanceId requirement;  // the ProcessingRequirement
};

/// Asserts the behavior, its effect with the featured properties, and the
/// ProcessingRequirement linking them. Throws on a duplicate name, an unknown
/// class or an effect class outside Creation.
Behavior register_behavior(KnowledgeBase& kb, std::string_view name, std::string_view effect_class,
                           const std::vector<AttributeSpec>& featured_props = {});
std::vector<Behavior> list_behaviors(const KnowledgeBase& kb);
Behavior get_behavior(const KnowledgeBase& kb, std::string_view name);

/// Processing relations that satisfy the behavior's requirement: the output
/// descends from the effect class, carries attributes matching every featured
/// property, and every input is realized by something no component produces
/// (the chain starts from the environment or from supplies). Throws StaleError.
std::vector<InstanceId> supporting_processing(const KnowledgeBase& kb, const Behavior& behavior);
std::vector<std::string> feasible_behaviors(const KnowledgeBase& kb);

enum class PositionModel { None, Visual, Acoustic };
std::string_view to_string(PositionModel model);
std::optional<PositionModel> parse_position_model(std::string_view text);

struct BehaviorProfile {
    std::optional<assess::SomMap> map;
    /// When unset, derived from the phenomena the supporting processing
    /// consumes: light means visual, sound means acoustic.
    std::optional<PositionModel> position_model;
};

struct AssessmentResult {
    std::string behavior;
    bool feasible = false;
    std::optional<double> p_success;
    std::optional<double> position_inaccuracy;
    PositionModel position_model = PositionModel::None;
    std::vector<InstanceId> supporting;
    std::optional<assess::GridIndex> bmu;
};

/// pSuccess is present only when the behavior is feasible and a map is bound.
AssessmentResult assess_behavior(const KnowledgeBase& kb, std::string_view behavior,
                                 const assess::AssessmentFeatures& conditions, const BehaviorProfile& profile);

struct Candidate {
    std::string name;
    bool feasible = false;
    std::optional<double> p_success;
};

/// Maximal pSuccess among feasible candidates meeting the threshold; ties go
/// to the lexicographically first name. Candidates without an estimate rank
/// below every candidate with one and never meet a threshold.
std::optional<std::string> choose(const std::vector<Candidate>& candidates, std::optional<double> min_performance);

std::optional<std::string> select_behavior(const KnowledgeBase& kb, const assess::AssessmentFeatures& conditions,
                                           const std::map<std::string, BehaviorProfile>& profiles,
                                           std::optional<double> min_performance = std::nullopt);

struct Answer {
    bool yes = false;
    AssessmentResult result;
};

/// yes iff feasible and pSuccess >= min_performance. A feasible behavior
/// without a map cannot be answered and throws.
Answer can_i_do_it(const KnowledgeBase& kb, std::string_view behavior, double min_performance,
                   const assess::AssessmentFeatures& conditions, const BehaviorProfile& profile);

// -- conditions ----------------------------------------------------------------

/// Declares the Conditions entity class and one attribute class per
/// well-known assessment feature (NoiseDb, TargetDistance, ...) plus
/// Visibility, skipping names that already exist. Returns the number added.
std::size_t install_conditions_vocabulary(KnowledgeBase& kb);

/// Features of an environment snapshot: every `<instance>.<Attribute>` value,
/// and for instances of class Conditions also the lowerCamel attribute name
/// (NoiseDb -> noiseDb).
assess::AssessmentFeatures condition_features(const sxdl::Document& doc);

}  // namespace selfx::mission
