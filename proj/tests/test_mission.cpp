#include <algorithm>

#include "doctest.h"
#include "selfx/inference.hpp"
#include "selfx/mission.hpp"
#include "selfx/schema.hpp"
#include "selfx/sxdl.hpp"
#include "support.hpp"

using namespace selfx;
using namespace selfx::testing;

namespace {

const std::string visual = "person detection via camera";
const std::string speech = "person detection via speech";

KnowledgeBase search_kb(const std::string& environment, const std::string& conditions = "conditions_degraded.sxdl") {
    std::vector<std::string> files{"camera.sxdl", "detector.sxdl"};
    if (!environment.empty()) files.push_back(environment);
    files.push_back("search.sxdl");
    files.push_back(conditions);
    KnowledgeBase kb = load_scenarios(files);
    inference::infer_to_fixpoint(kb);
    return kb;
}

assess::AssessmentFeatures conditions(const std::string& file = "conditions_degraded.sxdl") {
    return mission::condition_features(sxdl::parse_file(scenario_path(file)));
}

std::map<std::string, mission::BehaviorProfile> trained_profiles() {
    std::map<std::string, mission::BehaviorProfile> p;
    p[visual].map = assess::train_som(
        assess::records_for(assess::read_experience_log(scenario_path("visual_experience.jsonl")), visual));
    p[speech].map = assess::train_som(
        assess::records_for(assess::read_experience_log(scenario_path("acoustic_experience.jsonl")), speech));
    return p;
}

}  // namespace

TEST_CASE("registering behaviors") {
    KnowledgeBase kb = schema::make_knowledge_base();
    auto b = mission::register_behavior(kb, "fetch", "Data", {{"ROStopic", std::string("/fetched"), {}}});
    CHECK(b.name == "fetch");
    CHECK(b.effect_class == "Data");
    CHECK(mission::list_behaviors(kb).size() == 1);
    CHECK(mission::get_behavior(kb, "fetch").effect == b.effect);
    CHECK(kb.query_has(b.effect, "ROStopic").size() == 1);
    CHECK_THROWS_AS(mission::register_behavior(kb, "fetch", "Data"), Error);
    CHECK_THROWS_AS(mission::register_behavior(kb, "walk", "Sensor"), Error);
    CHECK_THROWS_AS(mission::register_behavior(kb, "walk", "Nope"), Error);
    CHECK_THROWS_AS(mission::get_behavior(kb, "walk"), Error);
}

TEST_CASE("feasibility follows the environment") {
    CHECK(mission::feasible_behaviors(search_kb("environment.sxdl")) == std::vector<std::string>{visual, speech});
    CHECK(mission::feasible_behaviors(search_kb("environment_dim.sxdl")) == std::vector<std::string>{speech});
    CHECK(mission::feasible_behaviors(search_kb("")).empty());
}

TEST_CASE("supporting processing produces the effect from the environment") {
    KnowledgeBase kb = search_kb("environment.sxdl");
    auto b = mission::get_behavior(kb, visual);
    auto support = mission::supporting_processing(kb, b);
    REQUIRE(support.size() == 1);
    auto view = inference::processing_view(kb, support[0]);
    std::vector<std::string> names;
    for (InstanceId e : view.executors) names.push_back(kb.label(e));
    CHECK(names == std::vector<std::string>{"camera", "detector", "locator"});
    CHECK(kb.label(view.output) == "visual_victims");
}

TEST_CASE("queries on a changed knowledge base are refused") {
    KnowledgeBase kb = search_kb("environment.sxdl");
    kb.assert_instance("Data");
    CHECK_THROWS_AS(mission::feasible_behaviors(kb), mission::StaleError);
    CHECK_THROWS_AS(mission::select_behavior(kb, conditions(), {}), mission::StaleError);
}

TEST_CASE("assessment under degraded conditions") {
    KnowledgeBase kb = search_kb("environment.sxdl");
    auto profiles = trained_profiles();
    auto c = conditions();

    auto v = mission::assess_behavior(kb, visual, c, profiles[visual]);
    CHECK(v.feasible);
    CHECK(v.p_success.value() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(v.position_model == mission::PositionModel::Visual);
    CHECK(v.position_inaccuracy.value() == doctest::Approx(2.25).epsilon(1e-12));

    auto s = mission::assess_behavior(kb, speech, c, profiles[speech]);
    CHECK(s.p_success.value() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(s.position_model == mission::PositionModel::Acoustic);
    CHECK(s.position_inaccuracy.value() == doctest::Approx(5.0).epsilon(1e-12));

    mission::BehaviorProfile forced = profiles[visual];
    forced.position_model = mission::PositionModel::Acoustic;
    CHECK(mission::assess_behavior(kb, visual, c, forced).position_inaccuracy.value() == doctest::Approx(5.0));

    CHECK_FALSE(mission::assess_behavior(kb, visual, c, {}).p_success.has_value());
    CHECK_THROWS_AS(mission::assess_behavior(kb, visual, c, profiles[speech]), Error);

    auto bad = c;
    bad.set(assess::AssessmentFeatures::human_prob, 2.0);
    CHECK_THROWS_AS(mission::assess_behavior(kb, visual, bad, profiles[visual]), std::domain_error);
}

TEST_CASE("selection and can-I-do-it in degraded and clear conditions") {
    auto profiles = trained_profiles();
    {
        KnowledgeBase kb = search_kb("environment.sxdl");
        auto c = conditions();
        CHECK(mission::select_behavior(kb, c, profiles) == speech);
        CHECK_FALSE(mission::can_i_do_it(kb, visual, 0.5, c, profiles[visual]).yes);
        CHECK(mission::can_i_do_it(kb, speech, 0.5, c, profiles[speech]).yes);
        CHECK_FALSE(mission::select_behavior(kb, c, profiles, 0.7).has_value());
    }
    {
        KnowledgeBase kb = search_kb("environment.sxdl", "conditions_clear.sxdl");
        CHECK(mission::select_behavior(kb, conditions("conditions_clear.sxdl"), profiles) == visual);
    }
    {
        // no light for the camera: only speech remains, whatever the map says
        KnowledgeBase kb = search_kb("environment_dim.sxdl", "conditions_clear.sxdl");
        auto c = conditions("conditions_clear.sxdl");
        CHECK(mission::select_behavior(kb, c, profiles) == speech);
        auto a = mission::can_i_do_it(kb, visual, 0.0, c, profiles[visual]);
        CHECK_FALSE(a.yes);
        CHECK_FALSE(a.result.feasible);
        CHECK_NOTHROW(mission::can_i_do_it(kb, visual, 0.0, c, {}));
        CHECK_THROWS_AS(mission::can_i_do_it(kb, speech, 0.0, c, {}), Error);
    }
}

TEST_CASE("property: can-I-do-it agrees with the assessment") {
    KnowledgeBase kb = search_kb("environment.sxdl");
    auto profiles = trained_profiles();
    assess::Rng rng(12);
    for (int i = 0; i < 100; ++i) {
        assess::AssessmentFeatures c;
        c.set("visibility", rng.uniform(0, 1));
        c.set("lightIntensity", rng.uniform(300, 800));
        c.set("noiseDb", rng.uniform(20, 90));
        double min = rng.uniform();
        for (const auto& name : {visual, speech}) {
            auto r = mission::assess_behavior(kb, name, c, profiles[name]);
            auto a = mission::can_i_do_it(kb, name, min, c, profiles[name]);
            CHECK(a.yes == (r.feasible && *r.p_success >= min));
        }
    }
}

TEST_CASE("property: choose picks the argmax regardless of order") {
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        assess::Rng rng(seed);
        std::vector<mission::Candidate> cs;
        std::size_t n = rng.index(6);
        for (std::size_t i = 0; i < n; ++i) {
            mission::Candidate c{"b" + std::to_string(rng.index(10)), rng.index(4) != 0, std::nullopt};
            if (rng.index(5) != 0) c.p_success = static_cast<double>(rng.index(5)) / 4.0;
            cs.push_back(c);
        }
        std::optional<double> min;
        if (rng.index(2)) min = rng.uniform();

        // oracle: best (has estimate, p, -name) among eligible candidates
        std::optional<std::string> expected;
        std::optional<mission::Candidate> best;
        for (const auto& c : cs) {
            if (!c.feasible) continue;
            if (min && !(c.p_success && *c.p_success >= *min)) continue;
            auto key = [](const mission::Candidate& x) {
                return std::tuple(x.p_success.has_value(), x.p_success.value_or(0.0));
            };
            if (!best || key(c) > key(*best) || (key(c) == key(*best) && c.name < best->name)) best = c;
        }
        if (best) expected = best->name;

        CHECK(mission::choose(cs, min) == expected);
        std::reverse(cs.begin(), cs.end());
        CHECK(mission::choose(cs, min) == expected);
        for (std::size_t i = cs.size(); i > 1; --i) std::swap(cs[i - 1], cs[rng.index(i)]);
        CHECK(mission::choose(cs, min) == expected);
    }
}

TEST_CASE("condition features use lowerCamel names for Conditions attributes") {
    auto c = conditions();
    CHECK(c.get("visibility") == 0.5);
    CHECK(c.get(assess::AssessmentFeatures::noise_db) == 40.0);
    CHECK(c.get(assess::AssessmentFeatures::target_distance) == 4.0);
    CHECK(c.get("conditions.NoiseDb") == 40.0);
    CHECK(c.get(assess::AssessmentFeatures::voice_db) == 70.0);

    KnowledgeBase kb = schema::make_knowledge_base();
    CHECK(mission::install_conditions_vocabulary(kb) > 0);
    CHECK(mission::install_conditions_vocabulary(kb) == 0);
    CHECK(kb.is_a(kb.class_id("NoiseDb"), "Property"));
}

TEST_CASE("position model names") {
    for (auto m : {mission::PositionModel::None, mission::PositionModel::Visual, mission::PositionModel::Acoustic})
        CHECK(mission::parse_position_model(mission::to_string(m)) == m);
    CHECK_FALSE(mission::parse_position_model("sonar").has_value());
}
