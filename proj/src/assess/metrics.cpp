#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "selfx/assess.hpp"

namespace selfx::assess {

namespace {

void require_non_negative(double x, std::string_view what) {
    if (!(x >= 0.0)) throw std::domain_error(fmt::format("{} must be non-negative, got {}", what, x));
}

// Frequent English words: function words, pronouns, common verbs and the
// vocabulary of short spoken replies. Sorted for binary search.
constexpr std::array kWords = std::to_array<std::string_view>({
    "a",       "about",   "above",   "after",   "again",   "against", "ah",      "all",     "alright", "also",
    "am",      "an",      "and",     "any",     "anybody", "anyone",  "are",     "around",  "as",      "ask",
    "at",      "away",    "back",    "bad",     "be",      "because", "been",    "before",  "behind",  "being",
    "below",   "between", "both",    "break",   "breathe", "but",     "by",      "call",    "came",    "can",
    "can't",   "cannot",  "come",    "could",   "day",     "did",     "didn't",  "do",      "does",    "doing",
    "don't",   "door",    "down",    "during",  "each",    "fine",    "fire",    "floor",   "for",     "found",
    "from",    "get",     "give",    "go",      "going",   "good",    "got",     "had",     "has",     "have",
    "he",      "hear",    "hello",   "help",    "her",     "here",    "hers",    "hey",     "hi",      "him",
    "his",     "hold",    "home",    "how",     "hurt",    "hurts",   "i",       "i'm",     "if",      "in",
    "inside",  "into",    "is",      "isn't",   "it",      "it's",    "its",     "just",    "know",    "leg",
    "let",     "like",    "little",  "look",    "lot",     "make",    "man",     "many",    "may",     "me",
    "more",    "most",    "move",    "much",    "must",    "my",      "myself",  "name",    "near",    "need",
    "no",      "nobody",  "not",     "now",     "of",      "off",     "oh",      "ok",      "okay",    "on",
    "once",    "one",     "only",    "or",      "other",   "our",     "ours",    "out",     "over",    "own",
    "pain",    "people",  "please",  "quick",   "really",  "right",   "room",    "said",    "same",    "save",
    "say",     "see",     "she",     "should",  "so",      "some",    "someone", "something", "sorry", "still",
    "stuck",   "such",    "take",    "tell",    "than",    "thank",   "thanks",  "that",    "that's",  "the",
    "their",   "theirs",  "them",    "then",    "there",   "these",   "they",    "thing",   "think",   "this",
    "those",   "three",   "through", "time",    "to",      "too",     "trapped", "two",     "under",   "until",
    "up",      "us",      "very",    "wait",    "want",    "was",     "water",   "way",     "we",      "well",
    "were",    "what",    "when",    "where",   "which",   "while",   "who",     "whom",    "why",     "will",
    "with",    "woman",   "won't",   "would",   "yeah",    "yes",     "yet",     "you",     "your",    "yours",
    "yourself",
});

}  // namespace

double visual_position_inaccuracy(double delta, double distance) {
    require_non_negative(delta, "robot position accuracy");
    require_non_negative(distance, "target distance");
    return delta + std::sqrt(distance);
}

double acoustic_position_inaccuracy(double room_width, double room_length) {
    require_non_negative(room_width, "room width");
    require_non_negative(room_length, "room length");
    return std::sqrt(room_width * room_width + room_length * room_length) / 2.0;
}

double acoustic_quality_margin(double noise_db, double voice_db) { return voice_db - noise_db; }

bool is_common_english_word(std::string_view w) { return std::binary_search(kWords.begin(), kWords.end(), w); }

std::size_t common_english_word_count() { return kWords.size(); }

double human_reply_probability(std::string_view transcript) {
    std::size_t words = 0;
    std::size_t known = 0;
    std::size_t i = 0;
    while (i < transcript.size()) {
        while (i < transcript.size() && std::isspace(static_cast<unsigned char>(transcript[i]))) ++i;
        std::size_t b = i;
        while (i < transcript.size() && !std::isspace(static_cast<unsigned char>(transcript[i]))) ++i;
        std::string_view raw = transcript.substr(b, i - b);
        auto edge = [](char c) { return !std::isalnum(static_cast<unsigned char>(c)); };
        while (!raw.empty() && edge(raw.front())) raw.remove_prefix(1);
        while (!raw.empty() && edge(raw.back())) raw.remove_suffix(1);
        if (raw.empty()) continue;
        std::string w(raw);
        for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        ++words;
        if (is_common_english_word(w)) ++known;
    }
    if (words == 0) return 0.0;
    return std::clamp(static_cast<double>(known) / static_cast<double>(words), 0.0, 1.0);
}

ImageQuality image_quality(const GrayImage& image) {
    if (image.height == 0 || image.width == 0) throw std::invalid_argument("image must have at least one pixel");
    if (image.pixels.size() != image.height * image.width)
        throw std::invalid_argument(fmt::format("image of {}x{} carries {} pixels", image.height, image.width,
                                                image.pixels.size()));
    const double n = static_cast<double>(image.pixels.size());
    double sum = 0.0;
    for (auto p : image.pixels) sum += p;
    const double mean = sum / n;
    double ss = 0.0;
    for (auto p : image.pixels) ss += (p - mean) * (p - mean);
    return {mean, std::sqrt(ss / n)};
}

// -- features ------------------------------------------------------------------

AssessmentFeatures::AssessmentFeatures() {
    values.emplace(voice_db, default_voice_db);
    values.emplace(robot_pos_accuracy, default_robot_pos_accuracy);
}

AssessmentFeatures::AssessmentFeatures(const std::map<std::string, double>& named) : AssessmentFeatures() {
    for (const auto& [k, v] : named) values[k] = v;
}

std::optional<double> AssessmentFeatures::get(std::string_view name) const {
    auto it = values.find(name);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

void AssessmentFeatures::set(std::string_view name, double value) { values[std::string(name)] = value; }

void AssessmentFeatures::validate() const {
    if (auto p = get(human_prob); p && !(*p >= 0.0 && *p <= 1.0))
        throw std::domain_error(fmt::format("{} must lie in [0, 1], got {}", human_prob, *p));
    for (auto name : {noise_db, voice_db, position_inaccuracy, robot_pos_accuracy, target_distance, light_intensity,
                      room_width, room_length})
        if (auto v = get(name)) require_non_negative(*v, name);
}

}  // namespace selfx::assess
