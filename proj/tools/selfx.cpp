#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "selfx/assess.hpp"
#include "selfx/inference.hpp"
#include "selfx/mission.hpp"
#include "selfx/schema.hpp"
#include "selfx/sxdl.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace selfx;

namespace {

constexpr int kOk = 0;
constexpr int kNo = 1;
constexpr int kFailed = 2;

struct Options {
    std::string kb_path;
    bool json = false;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("cannot write '{}'", tmp));
        out << text;
        if (!out.flush()) throw Error(fmt::format("cannot write '{}'", tmp));
    }
    fs::rename(tmp, path);
}

// FNV-1a; identifies the knowledge-base text a fixpoint was computed for.
std::uint64_t fingerprint(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string stamp_path(const Options& o) { return o.kb_path + ".inferred"; }

std::string stamp_text(std::string_view kb_text) { return fmt::format("selfx-infer {:016x}\n", fingerprint(kb_text)); }

KnowledgeBase load_kb(const Options& o) {
    KnowledgeBase kb = schema::make_knowledge_base();
    const std::string text = read_text(o.kb_path);
    if (!text.empty()) sxdl::load(sxdl::parse(text), kb);
    return kb;
}

/// The stored knowledge base with its fixpoint; fails when `infer` has not
/// been run since the last change.
KnowledgeBase inferred_kb(const Options& o) {
    const std::string text = read_text(o.kb_path);
    if (read_text(stamp_path(o)) != stamp_text(text)) throw mission::StaleError();
    KnowledgeBase kb = load_kb(o);
    inference::infer_to_fixpoint(kb);
    return kb;
}

void print(const Options& o, const ordered_json& j, const std::string& human) {
    if (o.json)
        std::cout << j.dump(2) << '\n';
    else
        std::cout << human;
}

std::string class_of(const KnowledgeBase& kb, InstanceId id) { return kb.get_class(kb.instance(id).cls).name; }

ordered_json labels(const KnowledgeBase& kb, const std::vector<InstanceId>& ids) {
    ordered_json a = ordered_json::array();
    for (InstanceId id : ids) a.push_back(kb.label(id));
    return a;
}

std::string joined(const KnowledgeBase& kb, const std::vector<InstanceId>& ids) {
    std::vector<std::string> parts;
    for (InstanceId id : ids) parts.push_back(kb.label(id));
    return parts.empty() ? "-" : fmt::format("{}", fmt::join(parts, ", "));
}

// -- commands --------------------------------------------------------------------

int cmd_load(const Options& o, const std::string& file) {
    KnowledgeBase kb = load_kb(o);
    auto report = sxdl::load(sxdl::parse_file(file), kb);
    write_text(o.kb_path, sxdl::dump(kb));

    ordered_json j;
    j["file"] = file;
    j["classes_added"] = report.classes_added;
    j["instances_added"] = report.instances_added;
    j["links_added"] = report.links_added;
    j["bindings"] = ordered_json::object();
    std::string human = fmt::format("loaded {}: {} classes, {} instances, {} links\n", file, report.classes_added,
                                    report.instances_added, report.links_added);
    for (const auto& [name, id] : report.bindings) {
        j["bindings"][name] = id.value;
        human += fmt::format("  {} = #{}\n", name, id.value);
    }
    print(o, j, human);
    return kOk;
}

int cmd_infer(const Options& o, const std::string& trace) {
    const std::string text = read_text(o.kb_path);
    KnowledgeBase kb = load_kb(o);
    auto stats = inference::infer_to_fixpoint(kb);
    if (!trace.empty()) {
        std::ofstream out(trace, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("cannot write '{}'", trace));
        inference::export_trace(kb, out);
    }
    write_text(stamp_path(o), stamp_text(text));

    ordered_json j;
    j["rounds"] = stats.rounds;
    j["facts_added"] = ordered_json::object();
    std::string human = fmt::format("fixpoint after {} rounds ({:.3f} ms)\n", stats.rounds,
                                    std::chrono::duration<double, std::milli>(stats.wall_time).count());
    for (const auto& r : inference::rule_names()) {
        j["facts_added"][r] = stats.facts_added.at(r);
        human += fmt::format("  {:<22} {}\n", r, stats.facts_added.at(r));
    }
    j["wall_time_ms"] = std::chrono::duration<double, std::milli>(stats.wall_time).count();
    j["diagnostics"] = ordered_json::array();
    for (const auto& d : stats.diagnostics) {
        j["diagnostics"].push_back({{"code", d.code}, {"message", d.message}});
        human += fmt::format("warning: {}: {}\n", d.code, d.message);
    }
    j["ledger"] = ordered_json::array();
    for (const auto& [prov, e] : stats.ledger) {
        ordered_json le;
        le["provider"] = kb.label(prov);
        le["committed_throughput"] = e.committed_throughput;
        le["throughput"] = e.throughput ? ordered_json(*e.throughput) : ordered_json();
        le["capacity"] = e.capacity ? ordered_json(*e.capacity) : ordered_json();
        le["remaining_time"] = e.remaining_time ? ordered_json(*e.remaining_time) : ordered_json();
        j["ledger"].push_back(le);
        human += fmt::format("ledger {}: committed {}{}{}\n", kb.label(prov), format_double(e.committed_throughput),
                             e.throughput ? " of " + format_double(*e.throughput) : std::string(),
                             e.remaining_time ? ", remaining " + format_double(*e.remaining_time) : std::string());
    }
    print(o, j, human);
    return kOk;
}

int cmd_query_processing(const Options& o, const std::string& output_class) {
    KnowledgeBase kb = inferred_kb(o);
    std::optional<ClassId> filter;
    if (!output_class.empty()) {
        filter = kb.find_class(output_class);
        if (!filter) throw Error(fmt::format("unknown class '{}'", output_class));
    }
    ordered_json j = ordered_json::array();
    std::string human = fmt::format("{:<6} {:<28} {:<28} {}\n", "id", "executors", "inputs", "output");
    for (const auto& v : inference::processing_relations(kb)) {
        if (filter && !kb.is_a(kb.instance(v.output).cls, *filter)) continue;
        j.push_back({{"id", v.relation.value},
                     {"executors", labels(kb, v.executors)},
                     {"inputs", labels(kb, v.inputs)},
                     {"output", kb.label(v.output)},
                     {"output_class", class_of(kb, v.output)},
                     {"composite", v.composite}});
        human += fmt::format("{:<6} {:<28} {:<28} {} ({})\n", v.relation.value, joined(kb, v.executors),
                             joined(kb, v.inputs), kb.label(v.output), class_of(kb, v.output));
    }
    print(o, j, human);
    return kOk;
}

ordered_json tree_json(const inference::ExplainNode& n) {
    ordered_json j;
    j["fact"] = n.fact.value;
    j["label"] = n.label;
    j["rule"] = n.rule ? ordered_json(*n.rule) : ordered_json();
    j["premises"] = ordered_json::array();
    for (const auto& p : n.premises) j["premises"].push_back(tree_json(p));
    return j;
}

int cmd_explain(const Options& o, std::uint64_t fact) {
    KnowledgeBase kb = inferred_kb(o);
    auto tree = inference::explain(kb, FactId{fact});
    print(o, tree_json(tree), inference::render(tree));
    return kOk;
}

int cmd_validate(const Options& o, const std::string& component) {
    KnowledgeBase kb = load_kb(o);
    auto report = schema::validate_component(kb, kb.instance_named(component));
    ordered_json j;
    j["component"] = component;
    j["ok"] = report.ok();
    j["violations"] = ordered_json::array();
    std::string human = report.ok() ? fmt::format("{}: conforms\n", component)
                                    : fmt::format("{}: {} violation(s)\n", component, report.violations.size());
    for (const auto& v : report.violations) {
        j["violations"].push_back({{"rule", v.rule}, {"message", v.message}});
        human += fmt::format("  [{}] {}\n", v.rule, v.message);
    }
    print(o, j, human);
    return report.ok() ? kOk : kNo;
}

int cmd_train(const Options& o, const std::string& behavior, const std::string& log, const assess::SomConfig& config,
              const std::string& out) {
    auto records = assess::records_for(assess::read_experience_log(log), behavior);
    if (records.empty()) throw Error(fmt::format("no records for '{}' in '{}'", behavior, log));
    auto som = assess::train_som(records, config);
    som.save(out);

    std::size_t non_empty = 0;
    for (const auto& n : som.nodes)
        if (n.member_count > 0) ++non_empty;
    ordered_json j;
    j["behavior"] = behavior;
    j["records"] = records.size();
    j["features"] = som.feature_names;
    j["rows"] = config.rows;
    j["cols"] = config.cols;
    j["non_empty_nodes"] = non_empty;
    j["map"] = out;
    print(o, j,
          fmt::format("trained '{}' on {} records ({}x{} grid, {} nodes in use) -> {}\n", behavior, records.size(),
                      config.rows, config.cols, non_empty, out));
    return kOk;
}

struct Situation {
    KnowledgeBase kb;
    assess::AssessmentFeatures conditions;
};

/// The stored knowledge base extended with an environment snapshot, inferred.
Situation situation(const Options& o, const std::string& conditions_file) {
    Situation s{inferred_kb(o), {}};
    mission::install_conditions_vocabulary(s.kb);
    auto doc = sxdl::parse_file(conditions_file);
    sxdl::load(doc, s.kb);
    s.conditions = mission::condition_features(doc);
    inference::infer_to_fixpoint(s.kb);
    return s;
}

mission::BehaviorProfile profile(const std::string& map_file, const std::string& position_model) {
    mission::BehaviorProfile p;
    if (!map_file.empty()) p.map = assess::SomMap::load(map_file);
    if (!position_model.empty() && position_model != "auto") {
        p.position_model = mission::parse_position_model(position_model);
        if (!p.position_model) throw Error(fmt::format("unknown position model '{}'", position_model));
    }
    return p;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string("-"); }

ordered_json result_json(const KnowledgeBase& kb, const mission::AssessmentResult& r) {
    ordered_json j;
    j["behavior"] = r.behavior;
    j["feasible"] = r.feasible;
    j["p_success"] = r.p_success ? ordered_json(*r.p_success) : ordered_json();
    j["position_inaccuracy"] = r.position_inaccuracy ? ordered_json(*r.position_inaccuracy) : ordered_json();
    j["position_model"] = std::string(mission::to_string(r.position_model));
    j["supporting_processing"] = ordered_json::array();
    for (InstanceId p : r.supporting) j["supporting_processing"].push_back(inference::describe(kb, p));
    return j;
}

std::string result_text(const KnowledgeBase& kb, const mission::AssessmentResult& r) {
    std::string s = fmt::format("behavior             {}\n", r.behavior);
    s += fmt::format("feasible             {}\n", r.feasible ? "yes" : "no");
    s += fmt::format("p(success)           {}\n", opt(r.p_success));
    s += fmt::format("position inaccuracy  {} ({})\n", opt(r.position_inaccuracy), mission::to_string(r.position_model));
    for (InstanceId p : r.supporting) s += fmt::format("supported by         {}\n", inference::describe(kb, p));
    return s;
}

int cmd_assess(const Options& o, const std::string& behavior, const std::string& conditions, const std::string& map,
               const std::string& position_model) {
    auto s = situation(o, conditions);
    auto r = mission::assess_behavior(s.kb, behavior, s.conditions, profile(map, position_model));
    print(o, result_json(s.kb, r), result_text(s.kb, r));
    return kOk;
}

int cmd_can(const Options& o, const std::string& behavior, double min, const std::string& conditions,
            const std::string& map, const std::string& position_model) {
    auto s = situation(o, conditions);
    auto a = mission::can_i_do_it(s.kb, behavior, min, s.conditions, profile(map, position_model));
    ordered_json j;
    j["answer"] = a.yes ? "yes" : "no";
    j["min_performance"] = min;
    j["result"] = result_json(s.kb, a.result);
    print(o, j, fmt::format("{}\n{}", a.yes ? "yes" : "no", result_text(s.kb, a.result)));
    return a.yes ? kOk : kNo;
}

int cmd_select(const Options& o, const std::string& conditions, const std::vector<std::string>& maps,
               std::optional<double> min) {
    auto s = situation(o, conditions);
    std::map<std::string, mission::BehaviorProfile> profiles;
    for (const auto& m : maps) {
        auto som = assess::SomMap::load(m);
        std::string name = som.behavior;
        profiles[name].map = std::move(som);
    }
    auto chosen = mission::select_behavior(s.kb, s.conditions, profiles, min);

    ordered_json j;
    j["selected"] = chosen ? ordered_json(*chosen) : ordered_json();
    j["behaviors"] = ordered_json::array();
    std::string human = fmt::format("selected: {}\n", chosen ? *chosen : std::string("none"));
    for (const auto& b : mission::list_behaviors(s.kb)) {
        auto it = profiles.find(b.name);
        auto r = mission::assess_behavior(s.kb, b.name, s.conditions,
                                          it == profiles.end() ? mission::BehaviorProfile{} : it->second);
        j["behaviors"].push_back(result_json(s.kb, r));
        human += fmt::format("  {:<32} feasible={:<3} p(success)={}\n", b.name, r.feasible ? "yes" : "no",
                             opt(r.p_success));
    }
    print(o, j, human);
    return chosen ? kOk : kNo;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selfx: capability knowledge base and self-assessment"};
    app.require_subcommand(1);
    Options o;
    const char* env = std::getenv("SELFX_KB");
    o.kb_path = env && *env ? env : "selfx.kb.sxdl";
    app.add_option("--kb", o.kb_path, "knowledge base file (default $SELFX_KB or selfx.kb.sxdl)");
    app.add_flag("--json", o.json, "machine-readable output");

    std::string file, trace, output_class, component, behavior, log, out, conditions, map, position_model;
    std::uint64_t fact = 0;
    double min = 0.0;
    std::optional<double> select_min;
    std::vector<std::string> maps;
    assess::SomConfig config;

    auto* load = app.add_subcommand("load", "parse a .sxdl file and add it to the knowledge base");
    load->add_option("file", file)->required();

    auto* infer = app.add_subcommand("infer", "run the rules to a fixpoint");
    infer->add_option("--trace", trace, "write derivations as JSON lines");

    auto* query = app.add_subcommand("query", "list inferred relations");
    query->require_subcommand(1);
    auto* processing = query->add_subcommand("processing", "inferred Processing relations");
    processing->add_option("--output", output_class, "only outputs of this class");

    auto* explain = app.add_subcommand("explain", "derivation tree of a fact");
    explain->add_option("fact-id", fact)->required();

    auto* validate = app.add_subcommand("validate", "check a component against its design pattern");
    validate->add_option("component", component)->required();

    auto* train = app.add_subcommand("train", "train a behavior's map from an experience log");
    train->add_option("--behavior", behavior)->required();
    train->add_option("--log", log)->required();
    train->add_option("--seed", config.seed);
    train->add_option("--rows", config.rows)->check(CLI::PositiveNumber);
    train->add_option("--cols", config.cols)->check(CLI::PositiveNumber);
    train->add_option("--epochs", config.epochs);
    train->add_option("--out", out)->required();

    auto* assess_cmd = app.add_subcommand("assess", "predict a behavior's performance under given conditions");
    assess_cmd->add_option("--behavior", behavior)->required();
    assess_cmd->add_option("--conditions", conditions)->required();
    assess_cmd->add_option("--map", map)->required();
    assess_cmd->add_option("--position-model", position_model, "visual, acoustic, none or auto");

    auto* can = app.add_subcommand("can", "can the robot do the behavior with at least this performance?");
    can->add_option("behavior", behavior)->required();
    can->add_option("--min-performance", min)->required()->check(CLI::Range(0.0, 1.0));
    can->add_option("--conditions", conditions)->required();
    can->add_option("--map", map);
    can->add_option("--position-model", position_model, "visual, acoustic, none or auto");

    auto* select = app.add_subcommand("select", "pick the best feasible behavior");
    select->add_option("--conditions", conditions)->required();
    select->add_option("--map", maps, "trained map, one per behavior");
    select->add_option("--min-performance", select_min)->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kFailed;
    }

    try {
        if (*load) return cmd_load(o, file);
        if (*infer) return cmd_infer(o, trace);
        if (*processing) return cmd_query_processing(o, output_class);
        if (*explain) return cmd_explain(o, fact);
        if (*validate) return cmd_validate(o, component);
        if (*train) return cmd_train(o, behavior, log, config, out);
        if (*assess_cmd) return cmd_assess(o, behavior, conditions, map, position_model);
        if (*can) return cmd_can(o, behavior, min, conditions, map, position_model);
        if (*select) return cmd_select(o, conditions, maps, select_min);
    } catch (const std::exception& e) {
        std::cerr << "selfx: " << e.what() << '\n';
        return kFailed;
    }
    return kFailed;
}
