#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "selfx/assess.hpp"

namespace selfx::assess {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return std::min(i, n - 1);
}

double SomConfig::start_radius() const {
    return initial_radius ? *initial_radius : static_cast<double>(std::max(rows, cols)) / 2.0;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

std::vector<double> values_of(const ExperienceRecord& r) {
    std::vector<double> v;
    v.reserve(r.features.size());
    for (const auto& f : r.features) v.push_back(f.second);
    return v;
}

}  // namespace

std::vector<double> SomMap::normalize(const std::vector<double>& raw) const {
    if (raw.size() != dimension())
        throw std::invalid_argument(fmt::format("expected {} features, got {}", dimension(), raw.size()));
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mean[i]) / stddev[i];
    return out;
}

std::vector<double> SomMap::select(const std::map<std::string, double, std::less<>>& named) const {
    std::vector<double> out;
    for (const auto& name : feature_names) {
        auto it = named.find(name);
        if (it == named.end()) throw std::invalid_argument(fmt::format("missing feature '{}'", name));
        out.push_back(it->second);
    }
    return out;
}

std::size_t nearest_node(const SomMap& som, const std::vector<double>& x, bool non_empty_only) {
    std::size_t best = som.nodes.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < som.nodes.size(); ++i) {
        if (non_empty_only && som.nodes[i].member_count == 0) continue;
        double d = squared_distance(x, som.nodes[i].prototype);
        if (best == som.nodes.size() || d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

SomMap train_som(const std::vector<ExperienceRecord>& records, const SomConfig& config) {
    if (records.empty()) throw std::invalid_argument("cannot train a map without records");
    if (config.rows == 0 || config.cols == 0) throw std::invalid_argument("map grid must have at least one node");

    SomMap som;
    som.behavior = records.front().behavior;
    som.config = config;
    for (const auto& f : records.front().features) som.feature_names.push_back(f.first);
    const std::size_t dim = som.dimension();
    if (dim == 0) throw std::invalid_argument("records carry no features");

    std::vector<std::vector<double>> data;
    for (const auto& r : records) {
        if (r.features.size() != dim) throw std::invalid_argument("ragged feature vectors");
        for (std::size_t i = 0; i < dim; ++i)
            if (r.features[i].first != som.feature_names[i])
                throw std::invalid_argument(fmt::format("feature '{}' where '{}' was expected", r.features[i].first,
                                                        som.feature_names[i]));
        data.push_back(values_of(r));
    }

    // z-score statistics; a constant feature keeps unit scale
    const double n = static_cast<double>(data.size());
    som.mean.assign(dim, 0.0);
    som.stddev.assign(dim, 0.0);
    for (const auto& x : data)
        for (std::size_t i = 0; i < dim; ++i) som.mean[i] += x[i];
    for (auto& m : som.mean) m /= n;
    for (const auto& x : data)
        for (std::size_t i = 0; i < dim; ++i) som.stddev[i] += (x[i] - som.mean[i]) * (x[i] - som.mean[i]);
    for (auto& s : som.stddev) {
        s = std::sqrt(s / n);
        if (!(s > 0.0)) s = 1.0;
    }
    for (auto& x : data) x = som.normalize(x);

    Rng rng(config.seed);
    som.nodes.resize(config.rows * config.cols);
    for (auto& node : som.nodes) {
        node.prototype.resize(dim);
        for (auto& w : node.prototype) w = rng.uniform(-1.0, 1.0);
    }

    std::vector<std::size_t> order(data.size());
    for (std::size_t e = 0; e < config.epochs; ++e) {
        const double t = config.epochs > 1 ? static_cast<double>(e) / static_cast<double>(config.epochs - 1) : 0.0;
        const double lr = config.initial_learning_rate + (config.final_learning_rate - config.initial_learning_rate) * t;
        const double radius = config.start_radius() + (config.final_radius - config.start_radius()) * t;
        const double two_r2 = 2.0 * radius * radius;

        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

        for (std::size_t k : order) {
            const auto& x = data[k];
            const std::size_t bmu = nearest_node(som, x, false);
            const double br = static_cast<double>(bmu / config.cols);
            const double bc = static_cast<double>(bmu % config.cols);
            for (std::size_t j = 0; j < som.nodes.size(); ++j) {
                const double dr = static_cast<double>(j / config.cols) - br;
                const double dc = static_cast<double>(j % config.cols) - bc;
                const double h = two_r2 > 0.0 ? std::exp(-(dr * dr + dc * dc) / two_r2) : (j == bmu ? 1.0 : 0.0);
                auto& w = som.nodes[j].prototype;
                for (std::size_t i = 0; i < dim; ++i) w[i] += lr * h * (x[i] - w[i]);
            }
        }
    }

    std::vector<double> successes(som.nodes.size(), 0.0);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const std::size_t bmu = nearest_node(som, data[k], false);
        ++som.nodes[bmu].member_count;
        if (records[k].outcome) successes[bmu] += 1.0;
    }
    for (std::size_t j = 0; j < som.nodes.size(); ++j)
        if (som.nodes[j].member_count > 0)
            som.nodes[j].outcome_mean = successes[j] / static_cast<double>(som.nodes[j].member_count);
    return som;
}

Prediction predict(const SomMap& som, const std::vector<double>& features) {
    const auto x = som.normalize(features);
    const std::size_t bmu = nearest_node(som, x, false);
    const std::size_t used = som.nodes[bmu].member_count > 0 ? bmu : nearest_node(som, x, true);
    if (used == som.nodes.size()) throw Error(fmt::format("map for '{}' has no trained node", som.behavior));
    Prediction p;
    p.p_success = *som.nodes[used].outcome_mean;
    p.bmu = {bmu / som.config.cols, bmu % som.config.cols};
    p.node = {used / som.config.cols, used % som.config.cols};
    return p;
}

Prediction predict(const SomMap& som, const AssessmentFeatures& features) {
    return predict(som, som.select(features.values));
}

// -- serialization -----------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "selfx-som 1";

std::string num(double x) { return format_double(x); }

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw Error(fmt::format("bad number '{}' in map file", s));
    return v;
}

std::size_t parse_size(std::string_view s) {
    std::size_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw Error(fmt::format("bad count '{}' in map file", s));
    return v;
}

std::vector<std::string_view> fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t b = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > b) out.push_back(line.substr(b, i - b));
    }
    return out;
}

void check_text(const std::string& s, std::string_view what) {
    if (s.find('\n') != std::string::npos || s.find('\r') != std::string::npos)
        throw Error(fmt::format("{} must not contain line breaks", what));
}

class Lines {
public:
    explicit Lines(std::string_view text) : text_(text) {}

    std::string_view next() {
        if (pos_ >= text_.size()) throw Error("map file ends early");
        auto e = text_.find('\n', pos_);
        if (e == std::string_view::npos) e = text_.size();
        auto line = text_.substr(pos_, e - pos_);
        pos_ = e + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    }

    /// Rest of a `key value...` line, checking the key.
    std::string_view keyed(std::string_view key) {
        auto line = next();
        if (!line.starts_with(key) || line.size() < key.size() + 1 || line[key.size()] != ' ')
            throw Error(fmt::format("expected '{}' line in map file, found '{}'", key, line));
        return line.substr(key.size() + 1);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string SomMap::serialize() const {
    check_text(behavior, "behavior name");
    std::string out;
    out += fmt::format("{}\n", kMagic);
    out += fmt::format("behavior {}\n", behavior);
    out += fmt::format("seed {}\n", config.seed);
    out += fmt::format("grid {} {}\n", config.rows, config.cols);
    out += fmt::format("epochs {}\n", config.epochs);
    out += fmt::format("learning-rate {} {}\n", num(config.initial_learning_rate), num(config.final_learning_rate));
    out += fmt::format("radius {} {}\n", num(config.start_radius()), num(config.final_radius));
    out += fmt::format("features {}\n", feature_names.size());
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        check_text(feature_names[i], "feature name");
        out += fmt::format("feature {} {} {}\n", num(mean[i]), num(stddev[i]), feature_names[i]);
    }
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const auto& n = nodes[j];
        out += fmt::format("node {} {} {} {}", j / config.cols, j % config.cols, n.member_count,
                           n.outcome_mean ? num(*n.outcome_mean) : std::string("-"));
        for (double w : n.prototype) out += ' ' + num(w);
        out += '\n';
    }
    return out;
}

SomMap SomMap::deserialize(std::string_view text) {
    Lines in(text);
    if (in.next() != kMagic) throw Error("not a map file (bad header)");
    SomMap som;
    som.behavior = std::string(in.keyed("behavior"));
    som.config.seed = parse_size(in.keyed("seed"));
    auto grid = fields(in.keyed("grid"));
    if (grid.size() != 2) throw Error("bad grid line in map file");
    som.config.rows = parse_size(grid[0]);
    som.config.cols = parse_size(grid[1]);
    som.config.epochs = parse_size(in.keyed("epochs"));
    auto lr = fields(in.keyed("learning-rate"));
    auto rad = fields(in.keyed("radius"));
    if (lr.size() != 2 || rad.size() != 2) throw Error("bad schedule line in map file");
    som.config.initial_learning_rate = parse_double(lr[0]);
    som.config.final_learning_rate = parse_double(lr[1]);
    som.config.initial_radius = parse_double(rad[0]);
    som.config.final_radius = parse_double(rad[1]);

    const std::size_t dim = parse_size(in.keyed("features"));
    for (std::size_t i = 0; i < dim; ++i) {
        auto rest = in.keyed("feature");
        auto f = fields(rest);
        if (f.size() < 3) throw Error("bad feature line in map file");
        som.mean.push_back(parse_double(f[0]));
        som.stddev.push_back(parse_double(f[1]));
        som.feature_names.emplace_back(rest.substr(static_cast<std::size_t>(f[2].data() - rest.data())));
    }

    if (som.config.rows == 0 || som.config.cols == 0) throw Error("map grid must have at least one node");
    som.nodes.resize(som.config.rows * som.config.cols);
    for (std::size_t j = 0; j < som.nodes.size(); ++j) {
        auto f = fields(in.keyed("node"));
        if (f.size() != 4 + dim) throw Error("bad node line in map file");
        if (parse_size(f[0]) != j / som.config.cols || parse_size(f[1]) != j % som.config.cols)
            throw Error("node lines out of order in map file");
        auto& n = som.nodes[j];
        n.member_count = parse_size(f[2]);
        if (f[3] != "-") n.outcome_mean = parse_double(f[3]);
        if (n.outcome_mean.has_value() != (n.member_count > 0))
            throw Error("node outcome mean must be present exactly when the node has members");
        for (std::size_t i = 0; i < dim; ++i) n.prototype.push_back(parse_double(f[4 + i]));
    }
    return som;
}

void SomMap::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path));
    out << serialize();
    if (!out.flush()) throw Error(fmt::format("cannot write '{}'", path));
}

SomMap SomMap::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace selfx::assess
