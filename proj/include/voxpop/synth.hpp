#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "voxpop/core.hpp"
#include "voxpop/csv.hpp"
#include "voxpop/date.hpp"
#include "voxpop/survey.hpp"

namespace voxpop::synth {

// --- deterministic helpers -----------------------------------------------------

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Exact integer allocation of n over fractional shares (largest remainder).
inline std::vector<uint64_t> largest_remainder(uint64_t n, const std::vector<double>& shares) {
    std::vector<uint64_t> counts(shares.size());
    std::vector<std::pair<double, size_t>> rem(shares.size());
    uint64_t used = 0;
    for (size_t i = 0; i < shares.size(); ++i) {
        const double q = shares[i] * double(n);
        counts[i] = uint64_t(std::floor(q));
        rem[i] = {q - std::floor(q), i};
        used += counts[i];
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (size_t i = 0; used < n && i < rem.size(); ++i, ++used) ++counts[rem[i].second];
    return counts;
}

// --- synthetic tweet corpus -----------------------------------------------------

struct ElectorateSpec {
    uint32_t n_users = 10000;          // bots included
    double share_ff = 0.50, share_mp = 0.40, share_third = 0.10;
    double ultra_fraction = 0.85;      // of real users
    double switcher_fraction = 0.05;   // switch camp once, into the planted camp
    int switch_day_offset = 15;        // days after start
    double daily_rate = 1.0;           // tweets/user/day for normal activity
    double low_activity_rate = 0.06;
    double bot_fraction = 0.10;        // of n_users
    double bot_daily_rate = 0.5;
    double hashtag_prob = 0.25;        // camp seed hashtag per tweet
    double url_prob = 0.10;
    double retweet_prob = 0.30;
    double same_camp_retweet_prob = 0.90;  // planted homophily
    uint32_t camp_vocab_size = 400;
    double vocab_overlap = 0.30;       // shared fraction of the F and M vocabularies
    uint32_t tokens_min = 5, tokens_max = 10;
    uint64_t rng_seed = 20190811;
    Date start = Date::from_ymd(2019, 3, 1);
    uint32_t n_days = 60;
    std::vector<std::string> real_clients = {"Twitter for iPhone", "Twitter for Android",
                                             "Twitter Web App"};
    std::vector<std::string> bot_clients = {"AutoPosterPro 2.1", "CheapAds Bot"};

    void validate() const {
        if (n_users == 0) throw ConfigError("synth: n_users must be positive");
        if (std::abs(share_ff + share_mp + share_third - 1.0) > 1e-9)
            throw ConfigError("synth: camp shares must sum to 1");
        for (const double f : {share_ff, share_mp, share_third, ultra_fraction, switcher_fraction,
                               bot_fraction, hashtag_prob, url_prob, retweet_prob,
                               same_camp_retweet_prob, vocab_overlap})
            if (f < 0.0 || f > 1.0) throw ConfigError("synth: fractions must lie in [0,1]");
        if (ultra_fraction + switcher_fraction > 1.0 + 1e-9)
            throw ConfigError("synth: loyalty fractions exceed 1");
        if (n_days == 0) throw ConfigError("synth: n_days must be positive");
        if ((share_ff > 0 || share_mp > 0 || share_third > 0) && n_users == 0)
            throw ConfigError("synth: zero users cannot carry nonzero shares");
    }
};

// Seed hashtags injected per camp; a subset of data/seed_hashtags.csv.
inline const std::array<std::vector<std::string>, 3>& camp_hashtags() {
    static const std::array<std::vector<std::string>, 3> tags = {{
        {"cfk", "albertopresidente", "frentedetodos", "fuerzacristina", "sinceramente"},   // F
        {"sisepuede", "cambiemos", "juntosporelcambio", "yovotomm", "mm2019"},             // M
        {"lavagnapresidente", "consensofederal", "espertpresidente"},                      // T
    }};
    return tags;
}

struct PlantedUser {
    std::string user_id;
    Camp camp = Camp::F;
    std::string loyalty;  // "ultra" | "switcher" | "low" | "bot"
    Camp pre_switch_camp = Camp::F;  // switchers only
    double rate = 1.0;
    bool is_bot = false;
};

struct CorpusGroundTruth {
    std::vector<PlantedUser> users;

    std::string to_csv() const {
        std::string out = "user_id,camp,loyalty\n";
        for (const auto& u : users) out += u.user_id + "," + to_string(u.camp) + "," + u.loyalty + "\n";
        return out;
    }
};

namespace detail {

// F and M token windows overlap by vocab_overlap; the T window is disjoint, so
// third-party text is genuinely out-of-vocabulary for the binary classifier.
inline std::pair<uint32_t, uint32_t> vocab_window(Camp c, const ElectorateSpec& spec) {
    const uint32_t v = spec.camp_vocab_size;
    const auto o = uint32_t(std::llround(spec.vocab_overlap * double(v)));
    switch (c) {
        case Camp::F: return {0, v};
        case Camp::M: return {v - o, 2 * v - o};
        case Camp::T: return {2 * v, 3 * v};
    }
    return {0, v};
}

}  // namespace detail

// Writes an NDJSON corpus with planted ground truth. The same seed always
// produces the same bytes: user attributes come from one master RNG pass and
// every (user, day) cell re-seeds its own generator.
inline CorpusGroundTruth generate_corpus(const ElectorateSpec& spec, const std::string& corpus_path) {
    spec.validate();
    CorpusGroundTruth truth;

    const auto n_bots = uint32_t(std::llround(spec.bot_fraction * double(spec.n_users)));
    const uint32_t n_real = spec.n_users - n_bots;
    if (n_real == 0) throw ConfigError("synth: no real users left after bots");

    // camps: exact largest-remainder allocation, order shuffled
    const auto camp_counts =
        largest_remainder(n_real, {spec.share_ff, spec.share_mp, spec.share_third});
    std::vector<Camp> camps;
    camps.reserve(n_real);
    for (size_t c = 0; c < 3; ++c)
        camps.insert(camps.end(), camp_counts[c], c == 0 ? Camp::F : (c == 1 ? Camp::M : Camp::T));
    std::mt19937_64 master(spec.rng_seed);
    std::shuffle(camps.begin(), camps.end(), master);

    char idbuf[32];
    for (uint32_t i = 0; i < n_real; ++i) {
        PlantedUser u;
        std::snprintf(idbuf, sizeof idbuf, "u%06u", i);
        u.user_id = idbuf;
        u.camp = camps[i];
        std::mt19937_64 rng(splitmix64(spec.rng_seed ^ (0xA11CEull + i)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double roll = unif(rng);
        if (roll < spec.ultra_fraction) {
            u.loyalty = "ultra";
            u.rate = spec.daily_rate;
        } else if (roll < spec.ultra_fraction + spec.switcher_fraction) {
            u.loyalty = "switcher";
            u.rate = spec.daily_rate;
            const Camp others[2] = {Camp(((int(u.camp)) + 1) % 3), Camp(((int(u.camp)) + 2) % 3)};
            u.pre_switch_camp = others[unif(rng) < 0.5 ? 0 : 1];
        } else {
            u.loyalty = "low";
            u.rate = spec.low_activity_rate;
        }
        truth.users.push_back(std::move(u));
    }
    for (uint32_t i = 0; i < n_bots; ++i) {
        PlantedUser u;
        std::snprintf(idbuf, sizeof idbuf, "b%06u", i);
        u.user_id = idbuf;
        u.camp = Camp(i % 3);
        u.loyalty = "bot";
        u.rate = spec.bot_daily_rate;
        u.is_bot = true;
        truth.users.push_back(std::move(u));
    }

    // per-camp real-user index lists for retweet targeting
    std::array<std::vector<uint32_t>, 3> by_camp;
    for (uint32_t i = 0; i < n_real; ++i) by_camp[size_t(truth.users[i].camp)].push_back(i);

    std::string out;
    out.reserve(size_t(spec.n_users) * spec.n_days * 64);
    uint64_t tweet_seq = 0;
    char buf[64];
    for (uint32_t day = 0; day < spec.n_days; ++day) {
        const Date date = spec.start + int32_t(day);
        for (uint32_t ui = 0; ui < truth.users.size(); ++ui) {
            const PlantedUser& u = truth.users[ui];
            std::mt19937_64 rng(
                splitmix64(spec.rng_seed ^ (uint64_t(ui) * 1000003ull + day * 7919ull + 17ull)));
            std::poisson_distribution<int> n_tweets(u.rate);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const int n = n_tweets(rng);
            for (int t = 0; t < n; ++t) {
                const Camp camp = (u.loyalty == "switcher" && int(day) < spec.switch_day_offset)
                                      ? u.pre_switch_camp
                                      : u.camp;
                const auto [lo, hi] = detail::vocab_window(camp, spec);
                std::uniform_int_distribution<uint32_t> tok(lo, hi - 1);
                std::uniform_int_distribution<uint32_t> n_tok(spec.tokens_min, spec.tokens_max);
                std::string text;
                const uint32_t ntk = n_tok(rng);
                for (uint32_t j = 0; j < ntk; ++j) {
                    std::snprintf(buf, sizeof buf, "w%u", tok(rng));
                    if (!text.empty()) text += ' ';
                    text += buf;
                }
                if (unif(rng) < spec.hashtag_prob) {
                    const auto& tags = camp_hashtags()[size_t(camp)];
                    text += " #" + tags[size_t(unif(rng) * double(tags.size()))];
                }
                if (unif(rng) < spec.url_prob) {
                    std::snprintf(buf, sizeof buf, " https://t.co/%06llu",
                                  (unsigned long long)(tweet_seq % 1000000));
                    text += buf;
                }
                std::optional<std::string> retweet_of;
                if (unif(rng) < spec.retweet_prob && n_real > 1) {
                    const bool same = unif(rng) < spec.same_camp_retweet_prob;
                    const Camp target_camp =
                        same ? camp
                             : (unif(rng) < 0.5 ? Camp((int(camp) + 1) % 3) : Camp((int(camp) + 2) % 3));
                    const auto& pool = by_camp[size_t(target_camp)].empty()
                                           ? by_camp[size_t(camp)]
                                           : by_camp[size_t(target_camp)];
                    if (!pool.empty()) {
                        const uint32_t pick = pool[size_t(unif(rng) * double(pool.size())) % pool.size()];
                        if (pick != ui) retweet_of = truth.users[pick].user_id;
                    }
                }
                const auto& clients = u.is_bot ? spec.bot_clients : spec.real_clients;
                const auto& client = clients[size_t(unif(rng) * double(clients.size())) % clients.size()];
                const int64_t secs = int64_t(date.days()) * 86400 +
                                     int64_t(unif(rng) * 86399.0);

                std::snprintf(idbuf, sizeof idbuf, "t%09llu", (unsigned long long)tweet_seq++);
                nlohmann::json j{{"tweet_id", idbuf},
                                 {"user_id", u.user_id},
                                 {"timestamp", Timestamp{secs}.str()},
                                 {"text", text},
                                 {"source_client", client},
                                 {"lang", "es"}};
                if (retweet_of) j["retweet_of_user_id"] = *retweet_of;
                out += j.dump();
                out += '\n';
            }
        }
    }
    csv::write_file_atomic(corpus_path, out);
    return truth;
}

// --- synthetic survey panel -------------------------------------------------------

// Integer counts summing to n whose displayed whole percentages equal the
// targets. A cell may be unpinned, widening its window to [0, n]; that is only
// used where a published row is internally inconsistent ("sums to 106").
// Throws DataError with a size hint when the row is infeasible at this n.
inline std::vector<uint64_t> display_exact_counts(uint64_t n, const std::vector<int>& pct,
                                                  const std::vector<bool>& pinned = {},
                                                  const std::string& what = "row") {
    const auto lo_of = [&](int p) -> int64_t {
        return std::max<int64_t>(0, int64_t((int64_t(2 * p - 1) * int64_t(n) + 199) / 200));
    };
    const auto hi_of = [&](int p) -> int64_t {
        const int64_t x = int64_t(2 * p + 1) * int64_t(n);
        return std::min<int64_t>(int64_t(n), (x + 199) / 200 - 1);
    };
    const size_t m = pct.size();
    std::vector<int64_t> lo(m), hi(m), c(m);
    for (size_t i = 0; i < m; ++i) {
        const bool pin = pinned.empty() || pinned[i];
        lo[i] = pin ? lo_of(pct[i]) : 0;
        hi[i] = pin ? hi_of(pct[i]) : int64_t(n);
        if (lo[i] > hi[i])
            throw DataError("generate_panel: " + what + ": " + std::to_string(pct[i]) +
                            "% unreachable at n=" + std::to_string(n) + "; use a multiple of 100");
        c[i] = std::clamp<int64_t>(std::llround(double(pct[i]) * double(n) / 100.0), lo[i], hi[i]);
    }
    int64_t sum = 0;
    for (const auto x : c) sum += x;
    while (sum != int64_t(n)) {
        size_t best = m;
        int64_t best_slack = 0;
        for (size_t i = 0; i < m; ++i) {
            const int64_t slack = sum < int64_t(n) ? hi[i] - c[i] : c[i] - lo[i];
            if (slack > best_slack) {
                best_slack = slack;
                best = i;
            }
        }
        if (best == m)
            throw DataError("generate_panel: " + what + ": percentages infeasible at n=" +
                            std::to_string(n) + "; increase n (multiples of 100 are safe)");
        c[best] += sum < int64_t(n) ? 1 : -1;
        sum += sum < int64_t(n) ? 1 : -1;
    }
    return std::vector<uint64_t>(c.begin(), c.end());
}

struct PanelTargets {
    struct TransitionTarget {
        std::string pre;
        int af_pct, mm_pct, other_pct;
        std::optional<int> kept_pct;  // absent for Unknown/Other
        uint64_t n;
    };
    std::vector<TransitionTarget> rows;

    struct StratumTarget {
        std::string category;  // panel-field value ("M"/"F", age group, education)
        int revealed_pct;
        uint64_t n;
    };
    std::map<std::string, std::vector<StratumTarget>> axes;  // gender / age_group / education
    int total_revealed_pct = 82;

    // candidate -> {revealed, not revealed} x {Positive,Negative,Regular,NS/NC}
    struct ImageTarget {
        std::array<int, 4> pct;
        std::array<bool, 4> pinned = {true, true, true, true};
    };
    std::map<std::string, std::array<ImageTarget, 2>> images;

    // The published tables, with stratum sizes chosen so every cell is
    // reachable at whole-percent display precision.
    static PanelTargets published() {
        PanelTargets t;
        t.rows = {
            {"AF-CFK", 91, 2, 8, 91, 1500},  {"MM-MP", 6, 83, 11, 83, 900},
            {"Lavagna", 19, 9, 72, 56, 100}, {"Del Cano", 25, 0, 75, 54, 100},
            {"Espert", 19, 14, 67, 53, 100}, {"Gomez Centurion", 10, 8, 83, 69, 200},
            {"Blank/Null", 23, 4, 73, 47, 100}, {"Unknown/Other", 53, 11, 36, std::nullopt, 100},
        };
        t.axes["gender"] = {{"M", 83, 1450}, {"F", 81, 1550}};
        t.axes["age_group"] = {{"16-30", 67, 900}, {"31-50", 87, 1000}, {"51-65", 90, 700},
                               {"65+", 89, 400}};
        t.axes["education"] = {{"full secondary", 81, 1210},
                               {"incomplete secondary", 81, 1210},
                               {"full/incomplete university", 86, 580}};
        t.total_revealed_pct = 82;
        t.images["CFK"] = {{{{45, 43, 6, 5}}, {{20, 48, 22, 11}}}};
        t.images["MM"] = {{{{36, 50, 10, 4}}, {{26, 39, 21, 14}}}};
        // The source AF not-revealed row sums to 106%, which no single
        // denominator can produce; only its NS/NC cell is pinned.
        t.images["AF"] = {{{{45, 39, 7, 8}},
                           {ImageTarget{{15, 28, 28, 35}, {false, false, false, true}}}}};
        return t;
    }
};

// Deterministic panel whose weighted (unit-weight) tables reproduce the target
// rates exactly at whole-percent precision.
inline std::vector<survey::PanelResponse> generate_panel(const PanelTargets& targets) {
    std::vector<survey::PanelResponse> panel;
    uint64_t next_id = 0;
    char idbuf[16];
    const auto new_response = [&](const std::string& pre, const std::string& post) {
        survey::PanelResponse r;
        std::snprintf(idbuf, sizeof idbuf, "r%05llu", (unsigned long long)next_id++);
        r.respondent_id = idbuf;
        r.pre_choice = pre;
        r.post_choice = post;
        r.weight = 1.0;
        return r;
    };

    // 1. transition rows fix each respondent's pre/post choice and with them
    //    the revealed flag
    for (const auto& row : targets.rows) {
        const auto counts =
            display_exact_counts(row.n, {row.af_pct, row.mm_pct, row.other_pct}, {}, row.pre);
        uint64_t kept_in_other = 0;
        if (row.kept_pct) {
            if (row.pre == "AF-CFK" || row.pre == "MM-MP") {
                // keeping the vote IS the own-column cell for the two formulas
                const int col = row.pre == "AF-CFK" ? row.af_pct : row.mm_pct;
                if (col != *row.kept_pct)
                    throw DataError("generate_panel: kept% must equal the own-column% for " + row.pre);
            } else {
                const auto kc = display_exact_counts(row.n, {*row.kept_pct, 100 - *row.kept_pct}, {},
                                                     row.pre + " kept");
                kept_in_other = kc[0];
                if (kept_in_other > counts[2])
                    throw DataError("generate_panel: kept% exceeds other% for row " + row.pre);
            }
        }
        const std::string stray_other = row.pre == "Blank/Null" ? "Lavagna" : "Blank/Null";
        for (uint64_t i = 0; i < counts[0]; ++i)
            panel.push_back(new_response(row.pre, "AF-CFK"));
        for (uint64_t i = 0; i < counts[1]; ++i)
            panel.push_back(new_response(row.pre, "MM-MP"));
        for (uint64_t i = 0; i < counts[2]; ++i) {
            const bool keep = row.kept_pct && row.pre != "AF-CFK" && row.pre != "MM-MP" &&
                              i < kept_in_other;
            panel.push_back(new_response(row.pre, keep ? row.pre : stray_other));
        }
    }

    // 2. demographics: distribute each axis over the revealed / not-revealed
    //    pools so every stratum rate displays right
    std::vector<size_t> revealed_idx, hidden_idx, out_of_scope_idx;
    for (size_t i = 0; i < panel.size(); ++i) {
        if (!survey::in_disclosure_scope(panel[i])) out_of_scope_idx.push_back(i);
        else if (survey::revealed(panel[i])) revealed_idx.push_back(i);
        else hidden_idx.push_back(i);
    }
    const uint64_t scope_n = revealed_idx.size() + hidden_idx.size();
    const uint64_t scope_rev = revealed_idx.size();
    {
        const long long total_disp = (200 * (long long)scope_rev + (long long)scope_n) / (2 * (long long)scope_n);
        if (total_disp != targets.total_revealed_pct)
            throw DataError("generate_panel: transition rows give a total revealed rate of " +
                            std::to_string(total_disp) + "%, not " +
                            std::to_string(targets.total_revealed_pct) + "%; adjust row sizes");
    }

    for (const auto& [axis, strata] : targets.axes) {
        uint64_t axis_n = 0;
        for (const auto& s : strata) axis_n += s.n;
        if (axis_n != scope_n)
            throw DataError("generate_panel: axis '" + axis + "' sizes sum to " +
                            std::to_string(axis_n) + ", expected " + std::to_string(scope_n));
        // per-stratum revealed counts within display windows, summing to scope_rev
        const size_t m = strata.size();
        std::vector<int64_t> lo(m), hi(m), r(m);
        for (size_t s = 0; s < m; ++s) {
            const auto w = [&](int p, uint64_t n, bool upper) -> int64_t {
                if (!upper) return std::max<int64_t>(0, (int64_t(2 * p - 1) * int64_t(n) + 199) / 200);
                return std::min<int64_t>(int64_t(n),
                                         (int64_t(2 * p + 1) * int64_t(n) + 199) / 200 - 1);
            };
            lo[s] = w(strata[s].revealed_pct, strata[s].n, false);
            hi[s] = w(strata[s].revealed_pct, strata[s].n, true);
            r[s] = std::clamp<int64_t>(
                std::llround(double(strata[s].revealed_pct) * double(strata[s].n) / 100.0), lo[s],
                hi[s]);
        }
        int64_t sum = 0;
        for (const auto x : r) sum += x;
        while (sum != int64_t(scope_rev)) {
            size_t best = m;
            int64_t best_slack = 0;
            for (size_t s = 0; s < m; ++s) {
                const int64_t slack = sum < int64_t(scope_rev) ? hi[s] - r[s] : r[s] - lo[s];
                if (slack > best_slack) {
                    best_slack = slack;
                    best = s;
                }
            }
            if (best == m)
                throw DataError("generate_panel: axis '" + axis +
                                "' cannot reach the revealed total; adjust stratum sizes");
            r[best] += sum < int64_t(scope_rev) ? 1 : -1;
            sum += sum < int64_t(scope_rev) ? 1 : -1;
        }
        // fill stratum labels: first r[s] of the revealed pool, then n-r of the hidden pool
        const auto set_field = [&](size_t idx, const std::string& value) {
            auto& resp = panel[idx];
            if (axis == "gender") resp.gender = value;
            else if (axis == "age_group") resp.age_group = value;
            else resp.education = value;
        };
        size_t rev_at = 0, hid_at = 0;
        for (size_t s = 0; s < m; ++s) {
            for (int64_t i = 0; i < r[s]; ++i) set_field(revealed_idx[rev_at++], strata[s].category);
            const int64_t nh = int64_t(strata[s].n) - r[s];
            for (int64_t i = 0; i < nh; ++i) set_field(hidden_idx[hid_at++], strata[s].category);
        }
        for (size_t k = 0; k < out_of_scope_idx.size(); ++k)
            set_field(out_of_scope_idx[k], strata[k % m].category);
    }

    // 3. images per candidate within each revelation group
    for (const auto& [cand, groups] : targets.images) {
        for (int g = 0; g < 2; ++g) {
            const auto& pool = g == 0 ? revealed_idx : hidden_idx;
            const auto& tgt = groups[size_t(g)];
            const auto counts = display_exact_counts(
                pool.size(), {tgt.pct[0], tgt.pct[1], tgt.pct[2], tgt.pct[3]},
                {tgt.pinned[0], tgt.pinned[1], tgt.pinned[2], tgt.pinned[3]},
                cand + (g == 0 ? " revealed images" : " not-revealed images"));
            size_t at = 0;
            for (size_t v = 0; v < 4; ++v) {
                for (uint64_t i = 0; i < counts[v]; ++i) {
                    auto& resp = panel[pool[at++]];
                    const auto& val = survey::image_values()[v];
                    if (cand == "CFK") resp.image_cfk = val;
                    else if (cand == "MM") resp.image_mm = val;
                    else resp.image_af = val;
                }
            }
        }
    }
    for (const size_t idx : out_of_scope_idx) {
        panel[idx].image_cfk = "Regular";
        panel[idx].image_mm = "Regular";
        panel[idx].image_af = "Regular";
    }
    return panel;
}

}  // namespace voxpop::synth
