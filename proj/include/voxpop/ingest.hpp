#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "voxpop/core.hpp"
#include "voxpop/csv.hpp"
#include "voxpop/date.hpp"
#include "voxpop/text.hpp"

namespace voxpop::ingest {

struct RawTweet {
    std::string tweet_id;
    std::string user_id;
    Timestamp timestamp;
    std::string text;
    std::string source_client;
    std::vector<std::string> hashtags;  // lowercase, no leading '#'
    std::optional<std::string> retweet_of_user_id;
    std::string lang = "es";
};

struct CleanTweet {
    std::string tweet_id;
    std::string user_id;
    Date day;
    std::vector<std::string> tokens;
    std::vector<std::string> hashtags;
    std::optional<std::string> retweet_of_user_id;
};

struct SourceWhitelist {
    std::unordered_set<std::string> allowed_clients;

    bool contains(std::string_view client) const {
        return allowed_clients.count(trim(client)) > 0;
    }

    static std::string trim(std::string_view s) {
        size_t a = 0, b = s.size();
        while (a < b && std::isspace(uint8_t(s[a]))) ++a;
        while (b > a && std::isspace(uint8_t(s[b - 1]))) --b;
        return std::string(s.substr(a, b - a));
    }

    // The paper names no list; these are the official clients in practice.
    static SourceWhitelist official_clients() {
        return SourceWhitelist{{"Twitter for iPhone", "Twitter for Android", "Twitter Web App",
                                "Twitter Web Client", "Twitter for iPad", "TweetDeck"}};
    }

    // One client name per line.
    static SourceWhitelist load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open whitelist: " + path);
        SourceWhitelist wl;
        std::string line;
        while (std::getline(in, line)) {
            const std::string t = trim(line);
            if (!t.empty()) wl.allowed_clients.insert(t);
        }
        if (wl.allowed_clients.empty()) throw DataError("empty whitelist: " + path);
        return wl;
    }
};

struct ParseStats {
    uint64_t lines = 0;
    uint64_t parsed = 0;
    uint64_t malformed = 0;
    uint64_t out_of_window = 0;
    uint64_t hashtag_mismatches = 0;  // provided hashtags field != extraction from text
};

struct CollectionWindow {
    Date start;
    Date end;  // inclusive
    bool contains(Date d) const { return d >= start && d <= end; }
};

namespace detail {

inline std::optional<RawTweet> parse_record(const nlohmann::json& j, ParseStats& stats) {
    RawTweet t;
    try {
        if (!j.is_object()) return std::nullopt;
        const auto* id = j.contains("tweet_id") ? &j.at("tweet_id") : nullptr;
        if (!id || !id->is_string()) return std::nullopt;
        t.tweet_id = id->get<std::string>();
        if (!j.contains("user_id") || !j.at("user_id").is_string()) return std::nullopt;
        t.user_id = j.at("user_id").get<std::string>();
        if (!j.contains("timestamp") || !j.at("timestamp").is_string()) return std::nullopt;
        const auto ts = Timestamp::parse(j.at("timestamp").get<std::string>());
        if (!ts) return std::nullopt;
        t.timestamp = *ts;
        if (!j.contains("text") || !j.at("text").is_string()) return std::nullopt;
        t.text = j.at("text").get<std::string>();
        if (!j.contains("source_client") || !j.at("source_client").is_string()) return std::nullopt;
        t.source_client = j.at("source_client").get<std::string>();
        if (j.contains("lang") && j.at("lang").is_string()) t.lang = j.at("lang").get<std::string>();
        if (j.contains("retweet_of_user_id") && j.at("retweet_of_user_id").is_string())
            t.retweet_of_user_id = j.at("retweet_of_user_id").get<std::string>();

        const std::vector<std::string> extracted = text::extract_hashtags(t.text);
        if (j.contains("hashtags") && j.at("hashtags").is_array()) {
            for (const auto& h : j.at("hashtags")) {
                if (!h.is_string()) return std::nullopt;
                std::string tag = text::normalize(h.get<std::string>());
                if (!tag.empty() && tag[0] == '#') tag.erase(0, 1);
                if (!tag.empty()) t.hashtags.push_back(std::move(tag));
            }
            // Consistency check against extraction; the provided field wins.
            auto a = t.hashtags;
            auto b = extracted;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
            b.erase(std::unique(b.begin(), b.end()), b.end());
            if (a != b) ++stats.hashtag_mismatches;
        } else {
            t.hashtags = extracted;
        }
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    return t;
}

}  // namespace detail

// Parses NDJSON lines into RawTweets. Malformed lines are skipped and counted,
// never fatal; lines outside the collection window (when given) are counted
// separately. Input order is preserved.
template <typename LineRange>
std::vector<RawTweet> parse_stream(const LineRange& lines, ParseStats& stats,
                                   const std::optional<CollectionWindow>& window = std::nullopt) {
    std::vector<RawTweet> out;
    for (const auto& line : lines) {
        ++stats.lines;
        if (line.empty()) {
            ++stats.malformed;
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) {
            ++stats.malformed;
            continue;
        }
        auto t = detail::parse_record(j, stats);
        if (!t) {
            ++stats.malformed;
            continue;
        }
        if (window && !window->contains(t->timestamp.date())) {
            ++stats.out_of_window;
            continue;
        }
        ++stats.parsed;
        out.push_back(std::move(*t));
    }
    return out;
}

// Streaming file variant. Throws DataError if the file cannot be opened
// (unreadable input source is the one fatal case).
inline std::vector<RawTweet> parse_file(const std::string& path, ParseStats& stats,
                                        const std::optional<CollectionWindow>& window = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus: " + path);
    std::vector<RawTweet> out;
    std::string line;
    std::vector<std::string> one(1);
    while (std::getline(in, line)) {
        one[0] = line;
        auto parsed = parse_stream(one, stats, window);
        std::move(parsed.begin(), parsed.end(), std::back_inserter(out));
    }
    return out;
}

// True iff the tweet comes from a whitelisted client and therefore counts as a
// real voter; everything else goes to the bot stream.
inline bool filter_bots(const RawTweet& tweet, const SourceWhitelist& wl) {
    return wl.contains(tweet.source_client);
}

inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopwords: " + path);
    std::unordered_set<std::string> sw;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = SourceWhitelist::trim(line);
        if (!t.empty()) sw.insert(text::normalize(t));
    }
    return sw;
}

inline CleanTweet standardize(const RawTweet& tweet, const std::unordered_set<std::string>& stopwords) {
    CleanTweet c;
    c.tweet_id = tweet.tweet_id;
    c.user_id = tweet.user_id;
    c.day = tweet.timestamp.date();
    c.tokens = text::tokenize(tweet.text, {.stopwords = &stopwords});
    c.hashtags = tweet.hashtags;
    c.retweet_of_user_id = tweet.retweet_of_user_id;
    return c;
}

struct DailyStats {
    struct Row {
        uint64_t tweets = 0;
        uint64_t bot_tweets = 0;
        std::set<std::string> users;
        std::set<std::string> bots;
    };
    std::map<Date, Row> rows;

    void add_tweet(Date d, const std::string& user) {
        auto& r = rows[d];
        ++r.tweets;
        r.users.insert(user);
    }
    void add_bot_tweet(Date d, const std::string& user) {
        auto& r = rows[d];
        ++r.bot_tweets;
        r.bots.insert(user);
    }

    // Associative merge of per-shard partials.
    void merge(const DailyStats& other) {
        for (const auto& [d, r] : other.rows) {
            auto& mine = rows[d];
            mine.tweets += r.tweets;
            mine.bot_tweets += r.bot_tweets;
            mine.users.insert(r.users.begin(), r.users.end());
            mine.bots.insert(r.bots.begin(), r.bots.end());
        }
    }

    std::string to_csv() const {
        std::string out = "date,tweets,users,bot_tweets,bots\n";
        for (const auto& [d, r] : rows) {
            out += d.str() + "," + std::to_string(r.tweets) + "," + std::to_string(r.users.size()) +
                   "," + std::to_string(r.bot_tweets) + "," + std::to_string(r.bots.size()) + "\n";
        }
        return out;
    }
};

inline DailyStats corpus_stats(const std::vector<CleanTweet>& tweets,
                               const std::vector<RawTweet>& bot_tweets) {
    DailyStats stats;
    for (const auto& t : tweets) stats.add_tweet(t.day, t.user_id);
    for (const auto& t : bot_tweets) stats.add_bot_tweet(t.timestamp.date(), t.user_id);
    return stats;
}

// --- CleanTweet NDJSON artifact ----------------------------------------------

inline nlohmann::json to_json(const CleanTweet& c) {
    nlohmann::json j{{"tweet_id", c.tweet_id},
                     {"user_id", c.user_id},
                     {"day", c.day.str()},
                     {"tokens", c.tokens},
                     {"hashtags", c.hashtags}};
    if (c.retweet_of_user_id) j["retweet_of_user_id"] = *c.retweet_of_user_id;
    return j;
}

inline CleanTweet clean_from_json(const nlohmann::json& j) {
    CleanTweet c;
    c.tweet_id = j.at("tweet_id").get<std::string>();
    c.user_id = j.at("user_id").get<std::string>();
    const auto d = Date::parse(j.at("day").get<std::string>());
    if (!d) throw DataError("bad day in clean tweet record");
    c.day = *d;
    c.tokens = j.at("tokens").get<std::vector<std::string>>();
    c.hashtags = j.at("hashtags").get<std::vector<std::string>>();
    if (j.contains("retweet_of_user_id"))
        c.retweet_of_user_id = j.at("retweet_of_user_id").get<std::string>();
    return c;
}

inline std::string to_ndjson(const std::vector<CleanTweet>& tweets) {
    std::string out;
    for (const auto& t : tweets) out += to_json(t).dump() + "\n";
    return out;
}

inline std::vector<CleanTweet> load_clean_ndjson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open clean tweets: " + path);
    std::vector<CleanTweet> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DataError(path + ":" + std::to_string(lineno) + ": bad clean tweet record");
        out.push_back(clean_from_json(j));
    }
    return out;
}

inline std::string raw_to_ndjson(const std::vector<RawTweet>& tweets) {
    std::string out;
    for (const auto& t : tweets) {
        nlohmann::json j{{"tweet_id", t.tweet_id},     {"user_id", t.user_id},
                         {"timestamp", t.timestamp.str()}, {"text", t.text},
                         {"source_client", t.source_client}, {"lang", t.lang},
                         {"hashtags", t.hashtags}};
        if (t.retweet_of_user_id) j["retweet_of_user_id"] = *t.retweet_of_user_id;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace voxpop::ingest
