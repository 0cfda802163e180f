#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "selfx/inference.hpp"
#include "selfx/mission.hpp"
#include "selfx/schema.hpp"
#include "selfx/sxdl.hpp"

namespace selfx::testing {

std::string scenario_path(const std::string& file) { return std::string(SELFX_SCENARIO_DIR) + "/" + file; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

KnowledgeBase load_scenarios(const std::vector<std::string>& files) {
    KnowledgeBase kb = schema::make_knowledge_base();
    for (const auto& f : files) {
        if (f.starts_with("conditions")) mission::install_conditions_vocabulary(kb);
        sxdl::load(sxdl::parse_file(scenario_path(f)), kb);
    }
    return kb;
}

std::vector<std::vector<std::string>> scenario_sequences() {
    return {
        {"camera.sxdl"},
        {"camera.sxdl", "detector.sxdl"},
        {"camera.sxdl", "environment.sxdl"},
        {"camera.sxdl", "environment_dim.sxdl"},
        {"camera.sxdl", "detector.sxdl", "search.sxdl"},
        {"camera.sxdl", "conditions_degraded.sxdl"},
        {"camera.sxdl", "conditions_clear.sxdl"},
        {"camera.sxdl", "detector.sxdl", "environment.sxdl", "search.sxdl", "conditions_degraded.sxdl"},
    };
}

// -- canonical facts -------------------------------------------------------------

namespace {

bool generated_name(const std::string& name) {
    static const std::regex pattern("_[0-9]+_*");
    return std::regex_match(name, pattern);
}

std::string has_class(const KnowledgeBase& kb, const Link& l) { return kb.get_class(l.has_cls).name; }

std::string signature(const KnowledgeBase& kb, InstanceId id) {
    const Instance& inst = kb.instance(id);
    std::string s = kb.get_class(inst.cls).name;
    if (inst.value) {
        const Value& v = kb.asserted_value(id);
        s += "=" + (is_text(v) ? "\"" + std::get<std::string>(v) + "\"" : display(v));
    }
    if (!inst.name.empty() && !generated_name(inst.name)) s += "#" + inst.name;
    if (inst.environmental) s += "!env";
    std::vector<std::string> children;
    for (LinkId lid : kb.outgoing(id)) {
        const Link& l = kb.link(lid);
        if (l.type == LinkType::Has && l.origin == Origin::Asserted)
            children.push_back(has_class(kb, l) + ":" + signature(kb, l.target));
    }
    std::sort(children.begin(), children.end());
    if (!children.empty()) s += fmt::format("{{{}}}", fmt::join(children, ","));
    return s;
}

}  // namespace

std::multiset<std::string> asserted_facts(const KnowledgeBase& kb) {
    std::multiset<std::string> out;
    for (const auto& [id, inst] : kb.instances())
        if (inst.origin == Origin::Asserted) out.insert("instance " + signature(kb, id));
    for (const auto& [id, l] : kb.links()) {
        if (l.origin != Origin::Asserted) continue;
        std::string kind = l.type == LinkType::Role ? "role " + kb.role(l.role).name : "has " + has_class(kb, l);
        out.insert(kind + " " + signature(kb, l.source) + " -> " + signature(kb, l.target));
    }
    return out;
}

std::set<Pair> realized_pairs(const KnowledgeBase& kb) {
    std::set<Pair> out;
    for (InstanceId r : kb.instances_of(schema::cls::Realizing))
        for (InstanceId a : kb.query_role(r, schema::role::requester))
            for (InstanceId b : kb.query_role(r, schema::role::provider)) out.emplace(a, b);
    return out;
}

// -- random realizing cases ------------------------------------------------------

namespace {

struct Bound {
    char kind;  // '=', '>', '<'
    double v;
};

struct Prop {
    std::string cls;   // Format, Rate, Power, Voltage, Intensity, Wavelength
    std::string text;  // format or unit; empty for rates
    std::vector<Bound> bounds;    // featured
    std::vector<double> amounts;  // provided
};

enum class Kind { Data, Resource, Phenomena };

struct Creation {
    Kind kind;
    bool requester = false;
    std::string cls;
    std::vector<Prop> props;
    InstanceId id;
};

constexpr double kGrid[] = {10.0, 20.0, 30.0};

bool holds(const std::vector<Bound>& bounds, double a) {
    for (const auto& b : bounds) {
        if (b.kind == '=' && std::fabs(a - b.v) > 1e-9) return false;
        if (b.kind == '>' && a < b.v) return false;
        if (b.kind == '<' && a > b.v) return false;
    }
    return true;
}

bool class_below(const std::string& cls, const std::string& ancestor) {
    return cls == ancestor || (cls == "Battery" && ancestor == "ElectricalPower");
}

// Direct statement of the realizing conditions over generator parameters.
bool oracle(const Creation& req, const Creation& prov) {
    if (req.kind != prov.kind) return false;
    if (req.kind == Kind::Data) {
        std::set<std::string> wanted;
        std::vector<Bound> rate;
        for (const auto& p : req.props) {
            if (p.cls == "Format") wanted.insert(p.text);
            if (p.cls == "Rate") rate.insert(rate.end(), p.bounds.begin(), p.bounds.end());
        }
        bool format = std::any_of(prov.props.begin(), prov.props.end(),
                                  [&](const Prop& p) { return p.cls == "Format" && wanted.contains(p.text); });
        if (!format) return false;
        if (rate.empty()) return true;
        std::vector<const Prop*> rates;
        for (const auto& p : prov.props)
            if (p.cls == "Rate") rates.push_back(&p);
        return rates.size() == 1 && rates[0]->amounts.size() == 1 && holds(rate, rates[0]->amounts[0]);
    }
    if (!class_below(prov.cls, req.cls)) return false;
    for (const auto& f : req.props) {
        bool found = std::any_of(prov.props.begin(), prov.props.end(), [&](const Prop& p) {
            if (p.cls != f.cls || p.text != f.text) return false;
            if (f.bounds.empty()) return true;
            if (p.amounts.empty()) return false;
            return std::all_of(p.amounts.begin(), p.amounts.end(), [&](double a) { return holds(f.bounds, a); });
        });
        if (!found) return false;
    }
    return true;
}

double pick(assess::Rng& rng) { return kGrid[rng.index(3)]; }

std::vector<Bound> random_bounds(assess::Rng& rng, std::size_t max) {
    std::vector<Bound> out;
    std::size_t n = rng.index(max + 1);
    for (std::size_t i = 0; i < n; ++i) out.push_back({"=><"[rng.index(3)], pick(rng)});
    return out;
}

AttributeSpec bounds_spec(const std::string& cls, Value own, const std::vector<Bound>& bounds) {
    AttributeSpec s{cls, std::move(own), {}};
    for (const auto& b : bounds)
        s.children.push_back({b.kind == '=' ? "Exact" : b.kind == '>' ? "Min" : "Max", b.v, {}});
    return s;
}

Creation random_data(assess::Rng& rng, bool requester) {
    static const char* formats[] = {"fa", "fb", "fc"};
    Creation c{Kind::Data, requester, rng.index(2) ? "Img" : "Data", {}, {}};
    std::size_t nf = rng.index(3);
    for (std::size_t i = 0; i < nf; ++i) c.props.push_back({"Format", formats[rng.index(3)], {}, {}});
    std::size_t nr = rng.index(3);
    for (std::size_t i = 0; i < nr; ++i) {
        Prop p{"Rate", "", {}, {}};
        if (requester) {
            if (rng.index(3) == 0)
                p.bounds.push_back({'=', pick(rng)});
            else
                p.bounds = random_bounds(rng, 2);
        } else {
            p.amounts.push_back(pick(rng));
            if (rng.index(5) == 0) p.amounts.push_back(pick(rng));
        }
        c.props.push_back(p);
    }
    return c;
}

Creation random_quantity(assess::Rng& rng, Kind kind, bool requester) {
    static const char* resource_props[][2] = {{"Power", "Watt"}, {"Voltage", "volt"}};
    static const char* phenomena_props[][2] = {{"Intensity", "Lumen"}, {"Wavelength", "nm"}};
    static const char* units[] = {"Watt", "volt", "Lumen", "nm"};
    Creation c{kind, requester, "", {}, {}};
    if (kind == Kind::Resource)
        c.cls = rng.index(2) ? "Battery" : "ElectricalPower";
    else
        c.cls = rng.index(4) ? "Light" : "Sound";
    auto& table = kind == Kind::Resource ? resource_props : phenomena_props;
    std::size_t n = rng.index(3);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& entry = table[rng.index(2)];
        Prop p{entry[0], rng.index(5) ? entry[1] : units[rng.index(4)], {}, {}};
        if (requester)
            p.bounds = random_bounds(rng, 2);
        else if (rng.index(5) != 0)
            p.amounts.push_back(pick(rng));
        c.props.push_back(p);
    }
    return c;
}

void assert_creation(KnowledgeBase& kb, assess::Rng& rng, Creation& c) {
    c.id = kb.assert_instance(c.cls);
    if (c.requester) {
        InstanceId feat = kb.assert_instance(schema::cls::Featuring);
        kb.assert_link(LinkKind::role("subject"), feat, c.id);
        std::optional<InstanceId> second;
        for (const auto& p : c.props) {
            InstanceId owner = feat;
            if (rng.index(4) == 0) {
                if (!second) {
                    second = kb.assert_instance(schema::cls::Featuring);
                    kb.assert_link(LinkKind::role("subject"), *second, c.id);
                }
                owner = *second;
            }
            if (p.cls == "Format") {
                kb.assert_attribute(owner, {rng.index(2) ? "ROSmsgs" : "Format", p.text, {}});
            } else if (p.cls == "Rate") {
                if (p.bounds.size() == 1 && p.bounds[0].kind == '=' && rng.index(2))
                    kb.assert_attribute(owner, {"FPS", p.bounds[0].v, {}});
                else
                    kb.assert_attribute(owner, bounds_spec("FPS", std::string("hz"), p.bounds));
            } else {
                kb.assert_attribute(owner, bounds_spec(p.cls, p.text, p.bounds));
            }
        }
        return;
    }
    for (const auto& p : c.props) {
        if (p.cls == "Format") {
            kb.assert_attribute(c.id, {rng.index(2) ? "ROSmsgs" : "Format", p.text, {}});
        } else if (p.cls == "Rate") {
            AttributeSpec s{"PS", p.amounts[0], {}};
            for (std::size_t i = 1; i < p.amounts.size(); ++i) s.children.push_back({"Exact", p.amounts[i], {}});
            kb.assert_attribute(c.id, s);
        } else {
            AttributeSpec s{p.cls, p.text, {}};
            for (double a : p.amounts) s.children.push_back({"Exact", a, {}});
            kb.assert_attribute(c.id, s);
        }
    }
    if (c.kind == Kind::Data && rng.index(2)) kb.assert_attribute(c.id, {"ROStopic", "/t" + std::to_string(c.id.value), {}});
}

}  // namespace

RealizingCase random_realizing_case(std::uint64_t seed, std::size_t max_creations, std::size_t max_requests) {
    assess::Rng rng(seed);
    RealizingCase rc{schema::make_knowledge_base(), {}, 0, 0};
    rc.kb.define_class("Img", "Data");
    rc.kb.define_class("Battery", "ElectricalPower");

    std::vector<Creation> all;
    std::size_t n = 1 + rng.index(max_creations);
    for (std::size_t i = 0; i < n; ++i) {
        bool requester = rc.requests < max_requests && rng.index(2) == 0;
        if (requester) ++rc.requests;
        std::size_t k = rng.index(3);
        Creation c = k == 0 ? random_data(rng, requester)
                            : random_quantity(rng, k == 1 ? Kind::Resource : Kind::Phenomena, requester);
        assert_creation(rc.kb, rng, c);
        all.push_back(std::move(c));
    }
    rc.creations = all.size();
    for (const auto& r : all)
        if (r.requester)
            for (const auto& p : all)
                if (!p.requester && oracle(r, p)) rc.expected.emplace(r.id, p.id);
    return rc;
}

// -- component chains ----------------------------------------------------------------

ChainCase chain_case(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                     const std::vector<bool>& sourced) {
    ChainCase cc{schema::make_knowledge_base(), {}, {}};
    KnowledgeBase& kb = cc.kb;
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::size_t> indegree(n, 0);
    for (auto [a, b] : edges) {
        succ[a].push_back(b);
        ++indegree[b];
    }
    for (std::size_t i = 0; i < n; ++i) {
        InstanceId comp = kb.assert_instance("Functional", std::nullopt, fmt::format("c{}", i));
        cc.components.push_back(comp);
        InstanceId in = kb.assert_instance("Data");
        InstanceId feat = kb.assert_instance("Featuring");
        kb.assert_link(LinkKind::role("subject"), feat, in);
        kb.assert_attribute(feat, {"ROSmsgs", fmt::format("in{}", i), {}});
        InstanceId out = kb.assert_instance("Data");
        for (std::size_t j : succ[i]) kb.assert_attribute(out, {"ROSmsgs", fmt::format("in{}", j), {}});
        InstanceId fr = kb.assert_instance("FunctionalRequirement");
        kb.assert_link(LinkKind::role("petitioner"), fr, comp);
        kb.assert_link(LinkKind::role("input"), fr, feat);
        kb.assert_link(LinkKind::role("output"), fr, out);
        if (sourced[i]) {
            InstanceId src = kb.assert_instance("Data");
            kb.assert_attribute(src, {"ROSmsgs", fmt::format("in{}", i), {}});
            kb.mark_environmental(src);
        }
    }

    // Simple paths of length >= 2 from every component with a realized input.
    std::vector<std::size_t> path;
    std::vector<bool> on_path(n, false);
    std::function<void(std::size_t)> walk = [&](std::size_t v) {
        path.push_back(v);
        on_path[v] = true;
        if (path.size() >= 2) {
            std::vector<InstanceId> seq;
            for (std::size_t k : path) seq.push_back(cc.components[k]);
            cc.expected_composites.insert(seq);
        }
        for (std::size_t w : succ[v])
            if (!on_path[w]) walk(w);
        on_path[v] = false;
        path.pop_back();
    };
    for (std::size_t i = 0; i < n; ++i)
        if (sourced[i] || indegree[i] > 0) walk(i);
    return cc;
}

ChainCase random_chain_case(std::uint64_t seed, std::size_t max_components) {
    assess::Rng rng(seed);
    std::size_t n = 1 + rng.index(max_components);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < 0.3) edges.emplace_back(order[i], order[j]);
    std::vector<bool> sourced(n);
    for (std::size_t i = 0; i < n; ++i) sourced[i] = rng.index(2) == 0;
    return chain_case(n, edges, sourced);
}

std::multiset<std::vector<InstanceId>> composite_sequences(const KnowledgeBase& kb) {
    std::multiset<std::vector<InstanceId>> out;
    for (const auto& v : inference::processing_relations(kb))
        if (v.composite) out.insert(v.executors);
    return out;
}

// -- clusters ---------------------------------------------------------------------------

double normal(assess::Rng& rng) {
    double u1 = 1.0 - rng.uniform();
    double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ClusterData two_clusters(std::uint64_t seed, std::size_t per_cluster, double separation, std::size_t held_out) {
    assess::Rng rng(seed);
    ClusterData d{};
    const double offset = separation / std::sqrt(2.0);
    d.centroid[0][0] = d.centroid[0][1] = 0.0;
    d.centroid[1][0] = d.centroid[1][1] = offset;
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < per_cluster; ++i) {
            double x = d.centroid[c][0] + normal(rng);
            double y = d.centroid[c][1] + normal(rng);
            d.records.push_back({"synthetic", {{"x", x}, {"y", y}}, c == 1});
        }
        for (std::size_t i = 0; i < held_out; ++i)
            d.held_out[c].push_back({d.centroid[c][0] + normal(rng), d.centroid[c][1] + normal(rng)});
    }
    return d;
}

}  // namespace selfx::testing
