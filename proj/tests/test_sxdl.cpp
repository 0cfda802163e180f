#include <string>

#include "doctest.h"
#include "selfx/inference.hpp"
#include "selfx/schema.hpp"
#include "selfx/sxdl.hpp"
#include "support.hpp"

using namespace selfx;
using namespace selfx::testing;

namespace {

const sxdl::AttrAssign& attr(const sxdl::InstanceDecl& d, std::size_t i) {
    return std::get<sxdl::AttrAssign>(d.items.at(i));
}

sxdl::ParseError parse_error(const std::string& text) {
    try {
        sxdl::parse(text);
    } catch (const sxdl::ParseError& e) {
        return e;
    }
    FAIL("expected a parse error for: " << text);
    throw;
}

}  // namespace

TEST_CASE("compact attribute assignments") {
    auto doc = sxdl::parse("instance d : CameraImage { hasFPS = 30; hasROStopic = \"/image_raw\"; }");
    REQUIRE(doc.statements.size() == 1);
    const auto& d = std::get<sxdl::InstanceDecl>(doc.statements[0]);
    CHECK(d.name == "d");
    CHECK(d.cls == "CameraImage");
    REQUIRE(d.items.size() == 2);
    CHECK(attr(d, 0).cls == "FPS");
    CHECK(std::get<double>(attr(d, 0).value) == 30.0);
    CHECK(attr(d, 1).cls == "ROStopic");
    CHECK(std::get<std::string>(attr(d, 1).value) == "/image_raw");
}

TEST_CASE("every statement kind parses") {
    auto doc = sxdl::parse(R"(
        // comment
        class RGBCamera : Sensor;
        instance cam : RGBCamera { has HealthState = true; has Quality = nan; }
        instance f : Featuring {
          role subject -> cam;
          has Voltage volt { has Exact = 5.0; }
          has Intensity "Lumen" { has Min = -1.5e2; }
        }
        link f.feature -> cam;
        environment { instance l : Light {} }
        behavior "say hi" { effect : Data { has ROStopic = "/hi"; } }
        behavior plain { effect : Data {} }
    )");
    REQUIRE(doc.statements.size() == 7);
    CHECK(std::holds_alternative<sxdl::ClassDecl>(doc.statements[0]));
    const auto& cam = std::get<sxdl::InstanceDecl>(doc.statements[1]);
    CHECK(std::get<bool>(attr(cam, 0).value) == true);
    CHECK(is_nan(attr(cam, 1).value));
    const auto& f = std::get<sxdl::InstanceDecl>(doc.statements[2]);
    CHECK(std::get<sxdl::RoleAssign>(f.items[0]).target == "cam");
    CHECK(attr(f, 1).nested);
    CHECK(std::get<std::string>(attr(f, 1).value) == "volt");
    CHECK(std::get<double>(attr(f, 2).children.at(0).value) == -150.0);
    CHECK(std::get<sxdl::LinkDecl>(doc.statements[3]).role == "feature");
    CHECK(std::get<sxdl::EnvDecl>(doc.statements[4]).instances.size() == 1);
    CHECK(std::get<sxdl::BehaviorDecl>(doc.statements[5]).name == "say hi");
    CHECK(std::get<sxdl::BehaviorDecl>(doc.statements[6]).name == "plain");
}

TEST_CASE("a misspelled keyword is reported with its position") {
    auto e = parse_error("class A : Data;\n  instanse x : A {}\n");
    CHECK(e.token() == "instanse");
    CHECK(e.where().line == 2);
    CHECK(e.where().column == 3);
    CHECK(std::string(e.what()).find("instanse") != std::string::npos);
}

TEST_CASE("lexical and syntax errors") {
    CHECK(parse_error("instance a : Data { has Name = \"open; }").detail().find("unterminated") != std::string::npos);
    CHECK(parse_error("instance a : Data { has Name = \"\\q\"; }").detail().find("escape") != std::string::npos);
    CHECK(parse_error("instance a : Data { has FPS = 1e999; }").detail().find("range") != std::string::npos);
    CHECK(parse_error("instance a : Data { has FPS = 30 }").token() == "}");
    CHECK(parse_error("instance a : Data {").token() == "end of input");
    CHECK(parse_error("class A : Data; #").token() == "#");
    CHECK(parse_error("class A : Data\r\nclass").where().line == 2);
}

TEST_CASE("names must be declared before use") {
    auto e = parse_error("instance f : Featuring { role subject -> d; }\ninstance d : Data {}");
    CHECK(e.token() == "d");
    CHECK(e.detail().find("forward reference") != std::string::npos);
    CHECK(parse_error("instance x : Later {}\nclass Later : Data;").token() == "Later");
}

TEST_CASE("property: parsing never fails other than with ParseError") {
    const std::string pieces[] = {"class", "instance", "link", "environment", "behavior", "effect", "has", "role",
                                  "A", "x", "Data", ":", ";", "{", "}", "=", ".", "->", "-", "\"s\"", "\"", "1.5",
                                  "-2", "1e", "nan", "true", "//c\n", "\n", " ", "\\", "@", "\x01", "\xc3\xa9"};
    std::size_t accepted = 0;
    for (std::uint64_t seed = 1; seed <= 3000; ++seed) {
        assess::Rng rng(seed);
        std::string text;
        std::size_t n = rng.index(25);
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.index(10) == 0)
                text += static_cast<char>(rng.index(256));
            else
                text += pieces[rng.index(std::size(pieces))] + std::string(rng.index(2) ? " " : "");
        }
        try {
            sxdl::parse(text);
            ++accepted;
        } catch (const sxdl::ParseError& e) {
            CHECK(e.where().line >= 1);
            CHECK(e.where().column >= 1);
        }
    }
    CHECK(accepted > 0);
}

TEST_CASE("loading reports what it added") {
    KnowledgeBase kb = schema::make_knowledge_base();
    auto report = sxdl::load(sxdl::parse("class Img : Data;\ninstance i : Img { has FPS = 30; }"), kb);
    CHECK(report.classes_added == 1);
    CHECK(report.instances_added == 2);
    CHECK(report.links_added == 1);
    CHECK(report.bindings.at("i") == kb.instance_named("i"));
}

TEST_CASE("load errors name the offending declaration") {
    KnowledgeBase kb = schema::make_knowledge_base();
    auto load_error = [&](const std::string& text) -> sxdl::LoadError {
        try {
            sxdl::load(sxdl::parse(text), kb);
        } catch (const sxdl::LoadError& e) {
            return e;
        }
        FAIL("expected a load error");
        throw;
    };
    CHECK(std::string(load_error("instance a : Nope {}").what()).find("unknown class") != std::string::npos);
    CHECK(std::string(load_error("instance m : Min {}").what()).find("attribute-arity") != std::string::npos);
    CHECK(std::string(load_error("instance a : Data { has Data = 1; }").what()).find("link-kind") !=
          std::string::npos);
    auto e = load_error("instance a : Data {}\n\ninstance b : Data { role subject -> nowhere; }");
    CHECK(e.where().line == 3);
}

TEST_CASE("loading is all or nothing") {
    KnowledgeBase kb = load_scenarios({"camera.sxdl"});
    auto before = asserted_facts(kb);
    const std::size_t classes = kb.classes().size();
    const std::string bad = "class Extra : Data;\ninstance ok : Extra { has FPS = 1; }\ninstance bad : Missing {}";
    CHECK_THROWS_AS(sxdl::load(sxdl::parse(bad), kb), sxdl::LoadError);
    CHECK(asserted_facts(kb) == before);
    CHECK(kb.classes().size() == classes);
    CHECK_FALSE(kb.find_instance("ok").has_value());
}

TEST_CASE("dump and reload preserve the asserted facts of every scenario") {
    for (const auto& files : scenario_sequences()) {
        CAPTURE(files.back());
        KnowledgeBase kb = load_scenarios(files);
        inference::infer_to_fixpoint(kb);
        const std::string text = sxdl::dump(kb);
        KnowledgeBase copy = schema::make_knowledge_base();
        sxdl::load(sxdl::parse(text), copy);
        CHECK(asserted_facts(copy) == asserted_facts(kb));
        CHECK(sxdl::dump(copy) == text);
    }
}

TEST_CASE("dump refuses facts it cannot write") {
    KnowledgeBase kb = schema::make_knowledge_base();
    kb.assert_instance("FPS", 30.0);
    CHECK_THROWS_AS(sxdl::dump(kb), Error);

    KnowledgeBase shared = schema::make_knowledge_base();
    InstanceId fps = shared.assert_instance("FPS", 30.0);
    shared.assert_link(LinkKind::has("FPS"), shared.assert_instance("Data"), fps);
    shared.assert_link(LinkKind::has("FPS"), shared.assert_instance("Data"), fps);
    CHECK_THROWS_AS(sxdl::dump(shared), Error);
}

TEST_CASE("environment features") {
    auto doc = sxdl::parse_file(scenario_path("environment.sxdl"));
    auto f = sxdl::environment_features(doc);
    CHECK(f.at("sunlight.Intensity") == 600.0);
    CHECK(f.at("sunlight.Wavelength") == 550.0);
    CHECK(f.at("battery.Power") == 10.0);
    CHECK(f.at("air.Visibility") == 1.0);
}
