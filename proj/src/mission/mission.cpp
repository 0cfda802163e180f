#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "selfx/inference.hpp"
#include "selfx/mission.hpp"
#include "selfx/schema.hpp"

namespace selfx::mission {

namespace cls = schema::cls;

namespace {

Behavior from_facts(const KnowledgeBase& kb, const schema::BehaviorFacts& f) {
    return {f.name, kb.get_class(kb.instance(f.effect).cls).name, f.behavior, f.effect, f.requirement};
}

void require_current(const KnowledgeBase& kb) {
    if (kb.dirty()) throw StaleError();
}

bool output_matches(const KnowledgeBase& kb, const Behavior& b, InstanceId output) {
    if (!kb.is_a(kb.instance(output).cls, kb.instance(b.effect).cls)) return false;
    auto provided = kb.query_has(output, cls::Property);
    for (InstanceId featured : kb.query_has(b.effect, cls::Property)) {
        bool found = std::any_of(provided.begin(), provided.end(),
                                 [&](InstanceId p) { return schema::property_matches(kb, featured, p); });
        if (!found) return false;
    }
    return true;
}

bool grounded(const KnowledgeBase& kb, const inference::ProcessingView& v) {
    for (InstanceId input : v.inputs) {
        auto providers = inference::providers_of(kb, input);
        if (std::none_of(providers.begin(), providers.end(),
                         [&](InstanceId p) { return !schema::is_component_product(kb, p); }))
            return false;
    }
    return true;
}

}  // namespace

Behavior register_behavior(KnowledgeBase& kb, std::string_view name, std::string_view effect_class,
                           const std::vector<AttributeSpec>& featured_props) {
    return from_facts(kb, schema::assert_behavior(kb, name, effect_class, featured_props));
}

std::vector<Behavior> list_behaviors(const KnowledgeBase& kb) {
    std::vector<Behavior> out;
    for (const auto& f : schema::behaviors(kb)) out.push_back(from_facts(kb, f));
    return out;
}

Behavior get_behavior(const KnowledgeBase& kb, std::string_view name) {
    auto f = schema::find_behavior(kb, name);
    if (!f) throw Error(fmt::format("unknown behavior '{}'", name));
    return from_facts(kb, *f);
}

std::vector<InstanceId> supporting_processing(const KnowledgeBase& kb, const Behavior& behavior) {
    require_current(kb);
    std::vector<InstanceId> out;
    for (const auto& v : inference::processing_relations(kb))
        if (output_matches(kb, behavior, v.output) && grounded(kb, v)) out.push_back(v.relation);
    return out;
}

std::vector<std::string> feasible_behaviors(const KnowledgeBase& kb) {
    require_current(kb);
    std::vector<std::string> out;
    for (const auto& b : list_behaviors(kb))
        if (!supporting_processing(kb, b).empty()) out.push_back(b.name);
    std::sort(out.begin(), out.end());
    return out;
}

std::string_view to_string(PositionModel model) {
    switch (model) {
        case PositionModel::None: return "none";
        case PositionModel::Visual: return "visual";
        case PositionModel::Acoustic: return "acoustic";
    }
    return "none";
}

std::optional<PositionModel> parse_position_model(std::string_view text) {
    for (auto m : {PositionModel::None, PositionModel::Visual, PositionModel::Acoustic})
        if (to_string(m) == text) return m;
    return std::nullopt;
}

namespace {

PositionModel derive_position_model(const KnowledgeBase& kb, const std::vector<InstanceId>& supporting) {
    bool sound = false;
    for (InstanceId p : supporting) {
        for (InstanceId input : inference::processing_view(kb, p).inputs) {
            if (kb.is_a(kb.instance(input).cls, cls::Light)) return PositionModel::Visual;
            if (kb.is_a(kb.instance(input).cls, cls::Sound)) sound = true;
        }
    }
    return sound ? PositionModel::Acoustic : PositionModel::None;
}

std::optional<double> position_inaccuracy(PositionModel model, const assess::AssessmentFeatures& c) {
    using F = assess::AssessmentFeatures;
    switch (model) {
        case PositionModel::Visual: {
            auto d = c.get(F::target_distance);
            auto delta = c.get(F::robot_pos_accuracy);
            if (!d || !delta) return std::nullopt;
            return assess::visual_position_inaccuracy(*delta, *d);
        }
        case PositionModel::Acoustic: {
            auto w = c.get(F::room_width);
            auto l = c.get(F::room_length);
            if (!w || !l) return std::nullopt;
            return assess::acoustic_position_inaccuracy(*w, *l);
        }
        case PositionModel::None: break;
    }
    return std::nullopt;
}

}  // namespace

AssessmentResult assess_behavior(const KnowledgeBase& kb, std::string_view behavior,
                                 const assess::AssessmentFeatures& conditions, const BehaviorProfile& profile) {
    const Behavior b = get_behavior(kb, behavior);
    conditions.validate();
    AssessmentResult r;
    r.behavior = b.name;
    r.supporting = supporting_processing(kb, b);
    r.feasible = !r.supporting.empty();
    r.position_model = profile.position_model ? *profile.position_model : derive_position_model(kb, r.supporting);
    r.position_inaccuracy = position_inaccuracy(r.position_model, conditions);
    if (r.feasible && profile.map) {
        if (profile.map->behavior != b.name)
            throw Error(fmt::format("map was trained for '{}', not '{}'", profile.map->behavior, b.name));
        auto p = assess::predict(*profile.map, conditions);
        r.p_success = p.p_success;
        r.bmu = p.node;
    }
    return r;
}

std::optional<std::string> choose(const std::vector<Candidate>& candidates, std::optional<double> min_performance) {
    const Candidate* best = nullptr;
    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.p_success.has_value() != b.p_success.has_value()) return a.p_success.has_value();
        if (a.p_success && *a.p_success != *b.p_success) return *a.p_success > *b.p_success;
        return a.name < b.name;
    };
    for (const auto& c : candidates) {
        if (!c.feasible) continue;
        if (min_performance && !(c.p_success && *c.p_success >= *min_performance)) continue;
        if (!best || better(c, *best)) best = &c;
    }
    if (!best) return std::nullopt;
    return best->name;
}

std::optional<std::string> select_behavior(const KnowledgeBase& kb, const assess::AssessmentFeatures& conditions,
                                           const std::map<std::string, BehaviorProfile>& profiles,
                                           std::optional<double> min_performance) {
    require_current(kb);
    static const BehaviorProfile none;
    std::vector<Candidate> candidates;
    for (const auto& b : list_behaviors(kb)) {
        auto it = profiles.find(b.name);
        auto r = assess_behavior(kb, b.name, conditions, it == profiles.end() ? none : it->second);
        candidates.push_back({r.behavior, r.feasible, r.p_success});
    }
    return choose(candidates, min_performance);
}

Answer can_i_do_it(const KnowledgeBase& kb, std::string_view behavior, double min_performance,
                   const assess::AssessmentFeatures& conditions, const BehaviorProfile& profile) {
    Answer a;
    a.result = assess_behavior(kb, behavior, conditions, profile);
    if (a.result.feasible && !a.result.p_success)
        throw Error(fmt::format("behavior '{}' is feasible but has no map to predict its performance", behavior));
    a.yes = a.result.feasible && *a.result.p_success >= min_performance;
    return a;
}

// -- conditions ----------------------------------------------------------------

namespace {

struct VocabularyEntry {
    std::string_view name;
    std::string_view parent;
};

constexpr VocabularyEntry kVocabulary[] = {
    {"Conditions", "Entity"},
    {"NoiseDb", "Property"},
    {"VoiceDb", "Property"},
    {"HumanProb", "Property"},
    {"PositionInaccuracy", "Property"},
    {"RobotPosAccuracy", "Property"},
    {"TargetDistance", "Property"},
    {"Brightness", "Property"},
    {"Contrast", "Property"},
    {"LightIntensity", "Property"},
    {"RoomWidth", "Property"},
    {"RoomLength", "Property"},
    {"Visibility", "PhysicalQuantity"},
};

}  // namespace

std::size_t install_conditions_vocabulary(KnowledgeBase& kb) {
    std::size_t added = 0;
    for (const auto& e : kVocabulary) {
        if (kb.find_class(e.name)) continue;
        kb.define_class(e.name, e.parent);
        ++added;
    }
    return added;
}

assess::AssessmentFeatures condition_features(const sxdl::Document& doc) {
    assess::AssessmentFeatures f(sxdl::environment_features(doc));
    for (const auto& s : doc.statements) {
        const auto* env = std::get_if<sxdl::EnvDecl>(&s);
        if (!env) continue;
        for (const auto& inst : env->instances) {
            if (inst.cls != "Conditions") continue;
            for (const auto& [key, value] : sxdl::environment_features(sxdl::Document{{sxdl::EnvDecl{{inst}, {}}}})) {
                std::string attr = key.substr(key.find('.') + 1);
                attr[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(attr[0])));
                f.set(attr, value);
            }
        }
    }
    return f;
}

}  // namespace selfx::mission
