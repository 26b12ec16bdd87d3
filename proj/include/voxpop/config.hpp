#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxpop/core.hpp"
#include "voxpop/date.hpp"

namespace voxpop::config {

// One flat, versioned file drives every subcommand; defaults reproduce the
// desk-scale study end to end.
struct PipelineConfig {
    int schema_version = 1;

    // inputs / outputs
    std::string corpus = "out/corpus.ndjson";
    std::string stopwords = "data/stopwords_es.txt";
    std::string whitelist = "data/whitelist.txt";
    std::string seed_hashtags = "data/seed_hashtags.csv";
    std::string official_results = "data/official_results_2019_general.csv";
    std::string census_margins = "data/census_margins.csv";
    std::string panel = "out/panel.csv";
    std::string output_dir = "out";

    // dates
    Date collection_start = Date::from_ymd(2019, 3, 1);
    Date collection_end = Date::from_ymd(2019, 10, 27);
    Date paso_date = Date::from_ymd(2019, 8, 11);
    Date general_date = Date::from_ymd(2019, 10, 27);
    Date training_cutoff = Date::from_ymd(2019, 8, 1);
    Date prediction_day = Date::from_ymd(2019, 10, 26);
    Date t0 = Date::from_ymd(2019, 3, 1);

    // parameters
    int window_days = 14;
    unsigned last_k = 10;
    double pvalue_cutoff = 1e-7;
    double threshold_low = 0.33;
    double threshold_high = 0.66;
    double lambda = 1e-4;
    unsigned epochs = 20;
    unsigned batch_size = 256;
    double learning_rate = 0.1;
    uint64_t rng_seed = 12345;
    std::vector<int> t0_offsets = {0, 7, 14, 21, 28};  // days added to t0 for the error estimate

    // toggles
    bool retweets_count_as_stance = true;
    bool homophily_iterate = false;
    bool n_counts_all_tweets = true;
    unsigned threads = 1;

    // synthetic-corpus section
    uint32_t synth_n_users = 10000;
    uint32_t synth_n_days = 60;
    double synth_share_ff = 0.50;
    double synth_share_mp = 0.40;
    double synth_share_third = 0.10;
    double synth_bot_fraction = 0.10;
    double synth_ultra_fraction = 0.85;
    double synth_switcher_fraction = 0.05;
    double synth_daily_rate = 0.8;
    uint64_t synth_seed = 20190811;

    void validate() const {
        if (schema_version != 1) throw ConfigError("config: unsupported schema_version");
        if (!(collection_start < collection_end))
            throw ConfigError("config: collection_start must precede collection_end");
        if (paso_date < collection_start || general_date > collection_end ||
            paso_date > general_date)
            throw ConfigError("config: election dates must be ordered within the collection window");
        if (training_cutoff <= collection_start || training_cutoff > collection_end)
            throw ConfigError("config: training_cutoff must lie inside the collection window");
        if (prediction_day < collection_start || prediction_day > collection_end)
            throw ConfigError("config: prediction_day must lie inside the collection window");
        if (t0 < collection_start || t0 >= prediction_day)
            throw ConfigError("config: t0 must lie in [collection_start, prediction_day)");
        if (window_days < 1) throw ConfigError("config: window_days must be >= 1");
        if (last_k < 1) throw ConfigError("config: last_k must be >= 1");
        if (!(pvalue_cutoff > 0 && pvalue_cutoff <= 1))
            throw ConfigError("config: pvalue_cutoff must be in (0,1]");
        if (!(threshold_low > 0 && threshold_low < threshold_high && threshold_high < 1))
            throw ConfigError("config: need 0 < threshold_low < threshold_high < 1");
        if (lambda < 0) throw ConfigError("config: lambda must be >= 0");
        if (epochs < 1 || batch_size < 1) throw ConfigError("config: epochs and batch_size must be >= 1");
        if (!(learning_rate > 0)) throw ConfigError("config: learning_rate must be positive");
        if (threads < 1) throw ConfigError("config: threads must be >= 1");
        if (t0_offsets.size() < 2) throw ConfigError("config: t0_offsets needs at least two entries");
        for (const int off : t0_offsets)
            if (off < 0 || !((t0 + off) < prediction_day))
                throw ConfigError("config: every t0_offset must keep T0 before prediction_day");
    }

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);

    static PipelineConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config: " + path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
        return from_json(j);
    }
};

namespace detail {

inline Date parse_date_key(const nlohmann::json& j, const char* key, Date fallback) {
    if (!j.contains(key)) return fallback;
    const auto d = Date::parse(j.at(key).get<std::string>());
    if (!d) throw ConfigError(std::string("config: bad date for key '") + key + "'");
    return *d;
}

}  // namespace detail

inline nlohmann::json PipelineConfig::to_json() const {
    return {{"schema_version", schema_version},
            {"corpus", corpus},
            {"stopwords", stopwords},
            {"whitelist", whitelist},
            {"seed_hashtags", seed_hashtags},
            {"official_results", official_results},
            {"census_margins", census_margins},
            {"panel", panel},
            {"output_dir", output_dir},
            {"collection_start", collection_start.str()},
            {"collection_end", collection_end.str()},
            {"paso_date", paso_date.str()},
            {"general_date", general_date.str()},
            {"training_cutoff", training_cutoff.str()},
            {"prediction_day", prediction_day.str()},
            {"t0", t0.str()},
            {"window_days", window_days},
            {"last_k", last_k},
            {"pvalue_cutoff", pvalue_cutoff},
            {"threshold_low", threshold_low},
            {"threshold_high", threshold_high},
            {"lambda", lambda},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"rng_seed", rng_seed},
            {"t0_offsets", t0_offsets},
            {"retweets_count_as_stance", retweets_count_as_stance},
            {"homophily_iterate", homophily_iterate},
            {"n_counts_all_tweets", n_counts_all_tweets},
            {"threads", threads},
            {"synth_n_users", synth_n_users},
            {"synth_n_days", synth_n_days},
            {"synth_share_ff", synth_share_ff},
            {"synth_share_mp", synth_share_mp},
            {"synth_share_third", synth_share_third},
            {"synth_bot_fraction", synth_bot_fraction},
            {"synth_ultra_fraction", synth_ultra_fraction},
            {"synth_switcher_fraction", synth_switcher_fraction},
            {"synth_daily_rate", synth_daily_rate},
            {"synth_seed", synth_seed}};
}

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    const nlohmann::json known = cfg.to_json();
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");

    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("schema_version", cfg.schema_version);
    get("corpus", cfg.corpus);
    get("stopwords", cfg.stopwords);
    get("whitelist", cfg.whitelist);
    get("seed_hashtags", cfg.seed_hashtags);
    get("official_results", cfg.official_results);
    get("census_margins", cfg.census_margins);
    get("panel", cfg.panel);
    get("output_dir", cfg.output_dir);
    cfg.collection_start = detail::parse_date_key(j, "collection_start", cfg.collection_start);
    cfg.collection_end = detail::parse_date_key(j, "collection_end", cfg.collection_end);
    cfg.paso_date = detail::parse_date_key(j, "paso_date", cfg.paso_date);
    cfg.general_date = detail::parse_date_key(j, "general_date", cfg.general_date);
    cfg.training_cutoff = detail::parse_date_key(j, "training_cutoff", cfg.training_cutoff);
    cfg.prediction_day = detail::parse_date_key(j, "prediction_day", cfg.prediction_day);
    cfg.t0 = detail::parse_date_key(j, "t0", cfg.t0);
    get("window_days", cfg.window_days);
    get("last_k", cfg.last_k);
    get("pvalue_cutoff", cfg.pvalue_cutoff);
    get("threshold_low", cfg.threshold_low);
    get("threshold_high", cfg.threshold_high);
    get("lambda", cfg.lambda);
    get("epochs", cfg.epochs);
    get("batch_size", cfg.batch_size);
    get("learning_rate", cfg.learning_rate);
    get("rng_seed", cfg.rng_seed);
    get("t0_offsets", cfg.t0_offsets);
    get("retweets_count_as_stance", cfg.retweets_count_as_stance);
    get("homophily_iterate", cfg.homophily_iterate);
    get("n_counts_all_tweets", cfg.n_counts_all_tweets);
    get("threads", cfg.threads);
    get("synth_n_users", cfg.synth_n_users);
    get("synth_n_days", cfg.synth_n_days);
    get("synth_share_ff", cfg.synth_share_ff);
    get("synth_share_mp", cfg.synth_share_mp);
    get("synth_share_third", cfg.synth_share_third);
    get("synth_bot_fraction", cfg.synth_bot_fraction);
    get("synth_ultra_fraction", cfg.synth_ultra_fraction);
    get("synth_switcher_fraction", cfg.synth_switcher_fraction);
    get("synth_daily_rate", cfg.synth_daily_rate);
    get("synth_seed", cfg.synth_seed);
    cfg.validate();
    return cfg;
}

}  // namespace voxpop::config
