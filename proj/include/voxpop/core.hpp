#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace voxpop {

// Political camp of a hashtag, tweet or user: M(acri), F(ernandez), T(hird party).
enum class Camp : uint8_t { F, M, T };

// Per-tweet stance. TP is only reachable through the seed-hashtag rule.
enum class Stance : uint8_t { FF, MP, TP, Unclassified };

// Per-user opinion bucket. Undecided = tie among nonzero stance counts,
// Unclassified = no classified tweet in the evaluation range.
enum class UserOpinion : uint8_t { FF, MP, TP, Undecided, Unclassified };

inline std::string to_string(Camp c) {
    switch (c) {
        case Camp::F: return "F";
        case Camp::M: return "M";
        case Camp::T: return "T";
    }
    return "?";
}

inline std::optional<Camp> parse_camp(std::string_view s) {
    // K is accepted as a synonym for F (Kirchner camp labels in source tables).
    if (s == "F" || s == "f" || s == "K" || s == "k") return Camp::F;
    if (s == "M" || s == "m") return Camp::M;
    if (s == "T" || s == "t") return Camp::T;
    return std::nullopt;
}

inline std::string to_string(Stance s) {
    switch (s) {
        case Stance::FF: return "FF";
        case Stance::MP: return "MP";
        case Stance::TP: return "TP";
        case Stance::Unclassified: return "Unclassified";
    }
    return "?";
}

inline std::optional<Stance> parse_stance(std::string_view s) {
    if (s == "FF") return Stance::FF;
    if (s == "MP") return Stance::MP;
    if (s == "TP") return Stance::TP;
    if (s == "Unclassified") return Stance::Unclassified;
    return std::nullopt;
}

inline std::string to_string(UserOpinion o) {
    switch (o) {
        case UserOpinion::FF: return "FF";
        case UserOpinion::MP: return "MP";
        case UserOpinion::TP: return "TP";
        case UserOpinion::Undecided: return "Undecided";
        case UserOpinion::Unclassified: return "Unclassified";
    }
    return "?";
}

inline Stance camp_to_stance(Camp c) {
    switch (c) {
        case Camp::F: return Stance::FF;
        case Camp::M: return Stance::MP;
        case Camp::T: return Stance::TP;
    }
    return Stance::Unclassified;
}

inline UserOpinion camp_to_opinion(Camp c) {
    switch (c) {
        case Camp::F: return UserOpinion::FF;
        case Camp::M: return UserOpinion::MP;
        case Camp::T: return UserOpinion::TP;
    }
    return UserOpinion::Unclassified;
}

// Thrown when an input file or artifact is unusable (CLI maps this to exit 4).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for bad configuration values (CLI maps this to exit 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace voxpop
