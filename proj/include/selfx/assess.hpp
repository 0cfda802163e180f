#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfx/types.hpp"

namespace selfx::assess {

// -- quality metrics -----------------------------------------------------------

inline constexpr double default_voice_db = 70.0;
inline constexpr double default_robot_pos_accuracy = 0.25;  // meters

/// D = delta + sqrt(d). Throws std::domain_error on negative input.
double visual_position_inaccuracy(double delta, double distance);
/// Half the room diagonal. Throws std::domain_error on negative input.
double acoustic_position_inaccuracy(double room_width, double room_length);
/// Expected voice level over background noise, in dB. May be negative.
double acoustic_quality_margin(double noise_db, double voice_db = default_voice_db);

/// Fraction of the transcript's words found in the built-in list of common
/// English words. Words are lowercased and stripped of surrounding
/// punctuation; an empty transcript gives 0.
double human_reply_probability(std::string_view transcript);
bool is_common_english_word(std::string_view lowercase_word);
std::size_t common_english_word_count();

struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, height * width
};

struct ImageQuality {
    double brightness = 0.0;  // pixel mean
    double contrast = 0.0;    // population standard deviation
};

/// Throws std::invalid_argument for an empty image or a size mismatch.
ImageQuality image_quality(const GrayImage& image);

// -- condition features ----------------------------------------------------------

/// Named condition and quality values. Well-known names are the constants
/// below; any other name is carried through as an extra feature.
struct AssessmentFeatures {
    static constexpr std::string_view noise_db = "noiseDb";
    static constexpr std::string_view voice_db = "voiceDb";
    static constexpr std::string_view human_prob = "humanProb";
    static constexpr std::string_view position_inaccuracy = "positionInaccuracy";
    static constexpr std::string_view robot_pos_accuracy = "robotPosAccuracy";
    static constexpr std::string_view target_distance = "targetDistance";
    static constexpr std::string_view brightness = "brightness";
    static constexpr std::string_view contrast = "contrast";
    static constexpr std::string_view light_intensity = "lightIntensity";
    static constexpr std::string_view room_width = "roomWidth";
    static constexpr std::string_view room_length = "roomLength";

    std::map<std::string, double, std::less<>> values;

    /// voiceDb and robotPosAccuracy start at their defaults.
    AssessmentFeatures();
    explicit AssessmentFeatures(const std::map<std::string, double>& named);

    std::optional<double> get(std::string_view name) const;
    void set(std::string_view name, double value);
    /// Throws std::domain_error when a probability leaves [0, 1] or a
    /// distance, level or intensity is negative.
    void validate() const;
};

// -- experience ------------------------------------------------------------------

struct ExperienceRecord {
    std::string behavior;
    std::vector<std::pair<std::string, double>> features;  // ordered
    bool outcome = false;
};

/// One log line: {"behavior": ..., "features": {name: number, ...}, "outcome": 0|1}.
ExperienceRecord parse_experience_line(std::string_view line);
std::string format_experience_line(const ExperienceRecord& record);

/// Every record of a log; blank lines are skipped. A missing file is an empty log.
std::vector<ExperienceRecord> read_experience_log(const std::string& path);
/// Records of one behavior, in log order.
std::vector<ExperienceRecord> records_for(const std::vector<ExperienceRecord>& log, std::string_view behavior);

/// Appends and flushes to stable storage. Throws when the log cannot be
/// written or when the record's feature names differ from earlier records of
/// the same behavior. Returns the number of records in the log afterwards.
std::size_t append_experience(const std::string& path, const ExperienceRecord& record);

// -- self-organizing map -----------------------------------------------------------

struct SomConfig {
    std::uint64_t seed = 1;
    std::size_t rows = 4;
    std::size_t cols = 4;
    std::size_t epochs = 200;
    double initial_learning_rate = 0.5;
    double final_learning_rate = 0.01;
    std::optional<double> initial_radius;  // max(rows, cols) / 2 when unset
    double final_radius = 0.5;

    double start_radius() const;
};

struct SomNode {
    std::vector<double> prototype;  // normalized feature space
    std::size_t member_count = 0;
    std::optional<double> outcome_mean;  // set iff member_count > 0
};

struct SomMap {
    std::string behavior;
    SomConfig config;
    std::vector<std::string> feature_names;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<SomNode> nodes;  // row-major

    std::size_t dimension() const { return feature_names.size(); }
    const SomNode& node(std::size_t row, std::size_t col) const { return nodes.at(row * config.cols + col); }

    std::vector<double> normalize(const std::vector<double>& raw) const;
    /// Feature values in map order, taken by name. Throws when one is missing.
    std::vector<double> select(const std::map<std::string, double, std::less<>>& named) const;

    /// Versioned text form; doubles round-trip exactly.
    std::string serialize() const;
    static SomMap deserialize(std::string_view text);
    void save(const std::string& path) const;
    static SomMap load(const std::string& path);
};

/// Trains one map from the records (all of one behavior, identical feature
/// names in identical order). Deterministic in config.seed. Throws
/// std::invalid_argument on an empty or ragged record list.
SomMap train_som(const std::vector<ExperienceRecord>& records, const SomConfig& config = {});

struct GridIndex {
    std::size_t row = 0;
    std::size_t col = 0;
    auto operator<=>(const GridIndex&) const = default;
};

struct Prediction {
    double p_success = 0.0;
    GridIndex bmu;   // nearest prototype
    GridIndex node;  // node the estimate comes from: the BMU, or the nearest non-empty node
    std::optional<double> position_inaccuracy;
};

/// Throws std::invalid_argument on a dimension mismatch and Error when no
/// node has members.
Prediction predict(const SomMap& som, const std::vector<double>& features);
Prediction predict(const SomMap& som, const AssessmentFeatures& features);

/// Index of the node nearest to a normalized vector (ties to the lowest
/// row-major index), optionally restricted to nodes with members.
std::size_t nearest_node(const SomMap& som, const std::vector<double>& normalized, bool non_empty_only);

/// std::mt19937_64 with its own mapping to doubles and indices: the engine's
/// sequence is fixed by the standard, the library distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    std::size_t index(std::size_t n);  // [0, n)

private:
    std::mt19937_64 engine_;
};

}  // namespace selfx::assess
