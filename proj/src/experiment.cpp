#include "driftbench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "driftbench/format.hpp"
#include "driftbench/ingest.hpp"
#include "driftbench/json_fields.hpp"
#include "driftbench/parallel.hpp"

namespace driftbench {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

// --- Config parsing ----------------------------------------------------------

namespace {

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(json_fields::child(path, key), "unknown field");
        }
    }
}

const json& required_array(const json& obj, std::string_view key, const std::string& path,
                           bool non_empty) {
    json_fields::require_object(obj, path);
    const auto it = obj.find(key);
    const auto where = json_fields::child(path, key);
    if (it == obj.end()) throw ConfigError(where, "missing required field");
    if (!it->is_array()) throw ConfigError(where, "expected an array");
    if (non_empty && it->empty()) throw ConfigError(where, "must contain at least one entry");
    return *it;
}

DatasetConfig parse_dataset(const json& j, const std::string& path) {
    using json_fields::optional;
    using json_fields::required;
    json_fields::require_object(j, path);
    DatasetConfig d;
    const auto kind = required<std::string>(j, "kind", path);
    if (kind == "yahoo_a1") {
        reject_unknown_keys(j, path, {"kind", "path"});
        d.kind = DatasetKind::YahooA1;
        d.path = required<std::string>(j, "path", path);
    } else if (kind == "nab_cloudwatch") {
        reject_unknown_keys(j, path, {"kind", "path", "labels"});
        d.kind = DatasetKind::NabCloudwatch;
        d.path = required<std::string>(j, "path", path);
        d.labels_path = required<std::string>(j, "labels", path);
    } else if (kind == "synthetic") {
        reject_unknown_keys(j, path, {"kind", "specs", "replicate"});
        d.kind = DatasetKind::Synthetic;
        const auto& specs = required_array(j, "specs", path, true);
        const auto specs_path = json_fields::child(path, "specs");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            auto spec = synth_spec_from_json(specs[i], json_fields::child(specs_path, i));
            if (!ids.insert(spec.id).second) {
                throw ConfigError(json_fields::child(json_fields::child(specs_path, i), "id"),
                                  fmt::format("duplicate series id '{}'", spec.id));
            }
            d.specs.push_back(std::move(spec));
        }
        d.replicate = optional<std::size_t>(j, "replicate", path, 1);
        if (d.replicate == 0) {
            throw ConfigError(json_fields::child(path, "replicate"), "replicate must be ≥ 1");
        }
    } else {
        throw ConfigError(json_fields::child(path, "kind"),
                          fmt::format("unknown dataset kind '{}' "
                                      "(yahoo_a1|nab_cloudwatch|synthetic)",
                                      kind));
    }
    return d;
}

RegimeConfig parse_regime(const json& j, const std::string& path) {
    using json_fields::optional;
    using json_fields::required;
    json_fields::require_object(j, path);
    reject_unknown_keys(j, path, {"data", "frequency", "window_len"});
    RegimeConfig r;
    const auto data = required<std::string>(j, "data", path);
    if (data == "static") r.data.kind = DataRegimeKind::Static;
    else if (data == "full_history") r.data.kind = DataRegimeKind::FullHistory;
    else if (data == "sliding_window") r.data.kind = DataRegimeKind::SlidingWindow;
    else {
        throw ConfigError(json_fields::child(path, "data"),
                          fmt::format("unknown data regime '{}' "
                                      "(static|full_history|sliding_window)",
                                      data));
    }
    const auto freq = optional<std::string>(j, "frequency", path, "blind");
    if (freq == "blind") r.frequency = FrequencyRegime::Blind;
    else if (freq == "informed") r.frequency = FrequencyRegime::Informed;
    else {
        throw ConfigError(json_fields::child(path, "frequency"),
                          fmt::format("unknown frequency regime '{}' (blind|informed)", freq));
    }
    if (r.data.kind == DataRegimeKind::Static) r.frequency = FrequencyRegime::Blind;
    if (j.contains("window_len")) {
        if (r.data.kind != DataRegimeKind::SlidingWindow) {
            throw ConfigError(json_fields::child(path, "window_len"),
                              "window_len only applies to sliding_window");
        }
        r.data.window_len = required<std::size_t>(j, "window_len", path);
        if (*r.data.window_len == 0) {
            throw ConfigError(json_fields::child(path, "window_len"), "window_len must be ≥ 1");
        }
    }
    return r;
}

fedd::FeddConfig parse_fedd(const json& j, const std::string& path) {
    using json_fields::optional;
    json_fields::require_object(j, path);
    reject_unknown_keys(j, path, {"lambda", "warn_limit", "drift_limit", "burn_in", "reference"});
    fedd::FeddConfig c;
    c.ecdd.lambda = optional<double>(j, "lambda", path, c.ecdd.lambda);
    c.ecdd.warn_limit = optional<double>(j, "warn_limit", path, c.ecdd.warn_limit);
    c.ecdd.drift_limit = optional<double>(j, "drift_limit", path, c.ecdd.drift_limit);
    c.ecdd.burn_in = optional<std::size_t>(j, "burn_in", path, c.ecdd.burn_in);
    if (!(c.ecdd.lambda > 0.0 && c.ecdd.lambda <= 1.0)) {
        throw ConfigError(json_fields::child(path, "lambda"), "lambda must be in (0, 1]");
    }
    if (!(c.ecdd.warn_limit > 0.0)) {
        throw ConfigError(json_fields::child(path, "warn_limit"), "warn_limit must be > 0");
    }
    if (!(c.ecdd.drift_limit > c.ecdd.warn_limit)) {
        throw ConfigError(json_fields::child(path, "drift_limit"),
                          "drift_limit must exceed warn_limit");
    }
    if (c.ecdd.burn_in < 2) {
        throw ConfigError(json_fields::child(path, "burn_in"), "burn_in must be ≥ 2");
    }
    const auto reference = optional<std::string>(j, "reference", path, "reset_on_drift");
    if (reference == "reset_on_drift") c.reference = fedd::ReferencePolicy::ResetOnDrift;
    else if (reference == "rolling") c.reference = fedd::ReferencePolicy::Rolling;
    else {
        throw ConfigError(json_fields::child(path, "reference"),
                          fmt::format("unknown reference policy '{}' (reset_on_drift|rolling)",
                                      reference));
    }
    return c;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    using json_fields::optional;
    using json_fields::required;
    const std::string root;
    json_fields::require_object(j, root);
    reject_unknown_keys(j, root,
                        {"dataset", "detector", "regimes", "batch_len", "delays", "seeds", "alpha",
                         "monitor", "late_policy", "output_dir"});
    ExperimentConfig c;

    if (!j.contains("dataset")) throw ConfigError("/dataset", "missing required field");
    c.dataset = parse_dataset(j.at("dataset"), "/dataset");

    if (!j.contains("detector")) throw ConfigError("/detector", "missing required field");
    const auto& det = json_fields::require_object(j.at("detector"), "/detector");
    reject_unknown_keys(det, "/detector", {"kind", "params"});
    const auto kind_name = required<std::string>(det, "kind", "/detector");
    DetectorKind kind{};
    try {
        kind = detector_kind_from(kind_name);
    } catch (const Error& e) {
        throw ConfigError("/detector/kind", e.what());
    }
    c.detector = det.contains("params")
                     ? detector_params_from_json(kind, det.at("params"), "/detector/params")
                     : default_params(kind);
    validate(c.detector, "/detector/params");

    const auto& regimes = required_array(j, "regimes", root, true);
    std::set<std::string> names;
    bool any_informed = false;
    for (std::size_t i = 0; i < regimes.size(); ++i) {
        const auto path = json_fields::child("/regimes", i);
        auto r = parse_regime(regimes[i], path);
        if (r.data.window_len && *r.data.window_len < min_window(c.detector)) {
            throw ConfigError(json_fields::child(path, "window_len"),
                              fmt::format("window_len {} is below the {} detector minimum of {}",
                                          *r.data.window_len, to_string(kind),
                                          min_window(c.detector)));
        }
        if (!names.insert(r.name()).second) {
            throw ConfigError(path, fmt::format("duplicate regime '{}'", r.name()));
        }
        any_informed = any_informed || r.frequency == FrequencyRegime::Informed;
        c.regimes.push_back(r);
    }

    c.batch_len = optional<std::size_t>(j, "batch_len", root, c.batch_len);
    if (c.batch_len < 2) throw ConfigError("/batch_len", "batch_len must be ≥ 2");

    const auto& delays = required_array(j, "delays", root, true);
    for (std::size_t i = 0; i < delays.size(); ++i) {
        c.delays.push_back(json_fields::convert<std::size_t>(delays[i],
                                                             json_fields::child("/delays", i)));
    }
    const auto& seeds = required_array(j, "seeds", root, true);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        c.seeds.push_back(json_fields::convert<std::uint64_t>(seeds[i],
                                                              json_fields::child("/seeds", i)));
    }
    if (std::set(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
        throw ConfigError("/seeds", "seeds must be distinct");
    }

    c.alpha = optional<double>(j, "alpha", root, c.alpha);
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("/alpha", "alpha must be in (0, 1)");

    if (j.contains("monitor")) {
        const auto& mon = json_fields::require_object(j.at("monitor"), "/monitor");
        reject_unknown_keys(mon, "/monitor", {"fedd"});
        if (mon.contains("fedd")) c.monitor = parse_fedd(mon.at("fedd"), "/monitor/fedd");
    }
    if (any_informed && !c.monitor) {
        throw ConfigError("/monitor/fedd",
                          "informed regimes need a drift monitor section \"monitor\": {\"fedd\": "
                          "{...}}");
    }

    const auto late = optional<std::string>(j, "late_policy", root, "zero_missed");
    if (late == "zero_missed") c.late_policy = LatePolicy::ZeroMissed;
    else if (late == "keep_raw") c.late_policy = LatePolicy::KeepRaw;
    else {
        throw ConfigError("/late_policy",
                          fmt::format("unknown late policy '{}' (zero_missed|keep_raw)", late));
    }

    c.output_dir = optional<std::string>(j, "output_dir", root, c.output_dir.string());
    if (c.output_dir.empty()) throw ConfigError("/output_dir", "output_dir must not be empty");
    return c;
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// 1-based line and column of a byte offset (nlohmann reports the offset one past the
/// offending character).
std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

json parse_json_text(const std::string& text, const fs::path& path) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte);
        throw ConfigError("", fmt::format("{}: JSON syntax error at line {}, column {}",
                                          path.string(), line, column));
    }
}

}  // namespace

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError("", e.what());
    }
    auto config = parse_experiment_config(parse_json_text(text, path));
    const auto base = path.parent_path();
    if (!config.dataset.path.empty() && config.dataset.path.is_relative()) {
        config.dataset.path = base / config.dataset.path;
    }
    if (!config.dataset.labels_path.empty() && config.dataset.labels_path.is_relative()) {
        config.dataset.labels_path = base / config.dataset.labels_path;
    }
    return config;
}

// --- Dataset -----------------------------------------------------------------

std::vector<LabeledSeries> load_dataset(const ExperimentConfig& config) {
    const auto& d = config.dataset;
    try {
        switch (d.kind) {
            case DatasetKind::YahooA1:
                if (!fs::is_directory(d.path)) {
                    throw DataError(fmt::format("dataset directory '{}' does not exist",
                                                d.path.string()));
                }
                return load_yahoo_a1(d.path);
            case DatasetKind::NabCloudwatch:
                if (!fs::is_directory(d.path)) {
                    throw DataError(fmt::format("dataset directory '{}' does not exist",
                                                d.path.string()));
                }
                return load_nab_cloudwatch(d.path, d.labels_path);
            case DatasetKind::Synthetic:
                break;
        }
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }

    // Synthetic: every (seed, spec, replicate) triple gets its own derived seed. Ids only
    // carry the seed when several seeds share one run, so single-seed reports pair up.
    std::vector<SynthSpec> specs;
    for (const auto seed : config.seeds) {
        for (const auto& base : d.specs) {
            for (std::size_t k = 0; k < d.replicate; ++k) {
                SynthSpec s = base;
                s.seed = mix_seed(mix_seed(base.seed, k), seed);
                if (d.replicate > 1) s.id = fmt::format("{}-{:03}", base.id, k);
                if (config.seeds.size() > 1) s.id = fmt::format("{}.s{}", s.id, seed);
                specs.push_back(std::move(s));
            }
        }
    }
    std::sort(specs.begin(), specs.end(),
              [](const SynthSpec& a, const SynthSpec& b) { return a.id < b.id; });
    std::vector<LabeledSeries> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(generate_synthetic(s));
    return out;
}

// --- Running -----------------------------------------------------------------

namespace {

struct MonitorResult {
    std::vector<fedd::DriftSignal> signals;
    std::string error;
};

std::vector<MonitorResult> monitor_corpus(const std::vector<LabeledSeries>& corpus,
                                          const ExperimentConfig& config, int jobs) {
    std::vector<MonitorResult> out(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        try {
            const auto split = split_half(corpus[i]);
            const auto batches = make_batches(split.test, config.batch_len);
            out[i].signals = fedd::fedd_monitor(corpus[i], split.train, batches, *config.monitor);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

SeriesScenarioResult score_record(const LabeledSeries& series, RunRecord record,
                                  const ExperimentConfig& config, const std::string& scenario) {
    SeriesScenarioResult r;
    r.series_id = series.id();
    r.scenario = scenario;
    const std::size_t delay = config.delays.front();
    for (std::size_t b = 0; b < record.batches.size(); ++b) {
        const auto labels = series.labels(record.batches[b].range());
        const auto adjusted = adjust_predictions(labels, record.predictions[b], delay,
                                                 config.late_policy);
        r.batch_counts.push_back(confusion(labels, adjusted));
    }
    const IndexRange test{record.batches.front().start, record.batches.back().end};
    const auto labels = series.labels(test);
    const auto preds = record.pooled_predictions();
    r.pooled = confusion(labels, adjust_predictions(labels, preds, delay, config.late_policy));
    for (const auto d : config.delays) {
        r.by_delay.push_back(
            metrics(confusion(labels, adjust_predictions(labels, preds, d, config.late_policy))));
    }
    r.record = std::move(record);
    return r;
}

std::map<std::string, MetricTriple> metrics_by_series(const ExperimentReport& report,
                                                      const std::string& scenario) {
    std::map<std::string, MetricTriple> out;
    for (const auto& r : report.results) {
        if (r.scenario == scenario) out[r.series_id] = r.by_delay.front();
    }
    return out;
}

}  // namespace

std::vector<ComparisonEntry> compare_scenarios(const std::string& name_a,
                                               const std::map<std::string, MetricTriple>& a,
                                               const std::string& name_b,
                                               const std::map<std::string, MetricTriple>& b,
                                               double alpha) {
    std::vector<const MetricTriple*> pa;
    std::vector<const MetricTriple*> pb;
    for (const auto& [id, m] : a) {
        if (const auto it = b.find(id); it != b.end()) {
            pa.push_back(&m);
            pb.push_back(&it->second);
        }
    }
    std::vector<ComparisonEntry> out;
    const std::pair<const char*, double MetricTriple::*> fields[] = {
        {"precision", &MetricTriple::precision},
        {"recall", &MetricTriple::recall},
        {"f1", &MetricTriple::f1},
    };
    for (const auto& [metric, member] : fields) {
        std::vector<double> xa;
        std::vector<double> xb;
        for (std::size_t i = 0; i < pa.size(); ++i) {
            xa.push_back(pa[i]->*member);
            xb.push_back(pb[i]->*member);
        }
        ComparisonEntry e{name_a, name_b, metric, std::nullopt, {}};
        try {
            e.test = wilcoxon_signed_rank(xa, xb, alpha);
        } catch (const Error& err) {
            e.error = err.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::vector<LabeledSeries>& corpus, int jobs) {
    ExperimentReport report;
    report.delays = config.delays;
    report.alpha = config.alpha;
    for (const auto& s : corpus) report.series_ids.push_back(s.id());

    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < corpus.size(); ++i) index_of[corpus[i].id()] = i;

    std::vector<MonitorResult> monitored;
    if (config.monitor) {
        monitored = monitor_corpus(corpus, config, jobs);
        for (const auto& m : monitored) {
            if (m.error.empty()) report.drift_signals.push_back(m.signals);
        }
        report.drift_fraction = drift_period_summary(report.drift_signals, false);
        report.first_drift_fraction = drift_period_summary(report.drift_signals, true);
    }
    const DriftMonitor cached = [&](const LabeledSeries& series, IndexRange, std::span<const Batch>) {
        const auto& m = monitored.at(index_of.at(series.id()));
        if (!m.error.empty()) throw Error(m.error);
        return m.signals;
    };

    for (const auto& regime : config.regimes) {
        const auto name = regime.name();
        report.scenarios.push_back(name);
        RunConfig rc;
        rc.detector = config.detector;
        rc.data = regime.data;
        rc.frequency = regime.frequency;
        rc.batch_len = config.batch_len;
        rc.seed = config.seeds.front();
        spdlog::info("scenario {}: {} series", name, corpus.size());
        auto outcomes = run_corpus(corpus, rc, config.monitor ? cached : DriftMonitor{}, jobs);

        std::vector<MetricTriple> firsts;
        std::vector<std::vector<MetricTriple>> per_delay(config.delays.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            auto& o = outcomes[i];
            if (!o.record) {
                spdlog::warn("scenario {}: {}", name, o.error);
                report.failures.push_back({name, corpus[i].id(), o.error});
                continue;
            }
            auto scored = score_record(corpus[i], std::move(*o.record), config, name);
            for (std::size_t d = 0; d < scored.by_delay.size(); ++d) {
                per_delay[d].push_back(scored.by_delay[d]);
            }
            report.results.push_back(std::move(scored));
        }
        ScenarioSummary summary;
        summary.name = name;
        summary.series = per_delay.front().size();
        if (summary.series > 0) {
            for (const auto& pd : per_delay) summary.by_delay.push_back(aggregate(pd));
            summary.mean = summary.by_delay.front();
        } else {
            summary.by_delay.assign(config.delays.size(), MetricTriple{});
        }
        report.summaries.push_back(std::move(summary));
    }

    for (std::size_t a = 0; a < report.scenarios.size(); ++a) {
        for (std::size_t b = a + 1; b < report.scenarios.size(); ++b) {
            const auto& na = report.scenarios[a];
            const auto& nb = report.scenarios[b];
            auto entries = compare_scenarios(na, metrics_by_series(report, na), nb,
                                             metrics_by_series(report, nb), config.alpha);
            for (auto& e : entries) report.comparisons.push_back(std::move(e));
        }
    }
    return report;
}

// --- Report writing ----------------------------------------------------------

namespace {

ordered_json metric_json(const MetricTriple& m) {
    ordered_json j;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    return j;
}

ordered_json comparison_json(const ComparisonEntry& e) {
    ordered_json j;
    j["a"] = e.a;
    j["b"] = e.b;
    j["metric"] = e.metric;
    if (e.test) {
        j["n"] = e.test->n;
        j["W"] = e.test->statistic;
        j["w_plus"] = e.test->w_plus;
        j["w_minus"] = e.test->w_minus;
        j["p"] = e.test->p_value;
        j["exact"] = e.test->exact;
        j["significant"] = e.test->significant;
        j["direction"] = e.test->direction;
    } else {
        j["error"] = e.error;
        j["significant"] = false;
    }
    return j;
}

std::string metric_columns(const MetricTriple& m) {
    return fmt::format("{},{},{}", format_double(m.precision), format_double(m.recall),
                       format_double(m.f1));
}

std::string count_columns(const ConfusionCounts& c) {
    return fmt::format("{},{},{},{}", c.tp, c.fp, c.fn, c.tn);
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << body;
    if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

ordered_json record_json(const SeriesScenarioResult& r) {
    const auto& rec = r.record;
    ordered_json j;
    j["scenario"] = r.scenario;
    j["series_id"] = rec.series_id;
    j["detector"] = {{"kind", std::string(to_string(kind_of(rec.config.detector)))},
                     {"params", to_json(rec.config.detector)}};
    j["data_regime"] = std::string(to_string(rec.config.data.kind));
    j["frequency"] = std::string(to_string(rec.config.frequency));
    if (rec.config.data.window_len) j["window_len"] = *rec.config.data.window_len;
    j["batch_len"] = rec.config.batch_len;
    j["seed"] = rec.config.seed;
    j["initial_train"] = {rec.initial_train.begin, rec.initial_train.end};
    auto batches = ordered_json::array();
    for (std::size_t b = 0; b < rec.batches.size(); ++b) {
        const auto& batch = rec.batches[b];
        std::vector<std::size_t> positives;
        for (std::size_t i = 0; i < rec.predictions[b].size(); ++i) {
            if (rec.predictions[b][i]) positives.push_back(batch.start + i);
        }
        ordered_json bj;
        bj["index"] = batch.index;
        bj["start"] = batch.start;
        bj["end"] = batch.end;
        bj["positives"] = positives;
        batches.push_back(std::move(bj));
    }
    j["batches"] = std::move(batches);
    auto retrains = ordered_json::array();
    for (const auto& e : rec.retrains) {
        retrains.push_back(ordered_json{{"batch_index", e.batch_index},
                                        {"trigger", std::string(to_string(e.trigger))},
                                        {"train_start", e.train_range.begin},
                                        {"train_end", e.train_range.end}});
    }
    j["retrains"] = std::move(retrains);
    auto signals = ordered_json::array();
    for (const auto& s : rec.drift_signals) {
        signals.push_back(ordered_json{{"batch_index", s.batch_index},
                                       {"status", std::string(fedd::to_string(s.status))}});
    }
    j["drift_signals"] = std::move(signals);
    return j;
}

}  // namespace

ordered_json summary_json(const ExperimentReport& report) {
    ordered_json j;
    j["alpha"] = report.alpha;
    j["delay"] = report.delays.front();
    j["delays"] = report.delays;
    ordered_json scenarios = ordered_json::object();
    for (const auto& s : report.summaries) {
        auto m = metric_json(s.mean);
        m["series"] = s.series;
        scenarios[s.name] = std::move(m);
    }
    j["scenarios"] = std::move(scenarios);
    ordered_json per_series = ordered_json::object();
    for (const auto& name : report.scenarios) per_series[name] = ordered_json::object();
    for (const auto& r : report.results) {
        per_series[r.scenario][r.series_id] = metric_json(r.by_delay.front());
    }
    j["per_series"] = std::move(per_series);
    auto comparisons = ordered_json::array();
    for (const auto& c : report.comparisons) comparisons.push_back(comparison_json(c));
    j["comparisons"] = std::move(comparisons);
    j["drift"] = {{"per_period", report.drift_fraction},
                  {"first_drift", report.first_drift_fraction}};
    return j;
}

void write_report(const ExperimentReport& report, const fs::path& dir) {
    fs::create_directories(dir);

    std::string per_series = "series_id,scenario,batch,tp,fp,fn,tn,precision,recall,f1\n";
    for (const auto& r : report.results) {
        for (std::size_t b = 0; b < r.batch_counts.size(); ++b) {
            const auto& c = r.batch_counts[b];
            per_series += fmt::format("{},{},{},{},{}\n", r.series_id, r.scenario,
                                      r.record.batches[b].index, count_columns(c),
                                      metric_columns(metrics(c)));
        }
        per_series += fmt::format("{},{},all,{},{}\n", r.series_id, r.scenario,
                                  count_columns(r.pooled), metric_columns(metrics(r.pooled)));
    }
    write_text(dir / "per_series.csv", per_series);

    write_text(dir / "summary.json", summary_json(report).dump(2) + "\n");

    std::string curve = "scenario,delay,precision,recall,f1\n";
    for (const auto& s : report.summaries) {
        for (std::size_t d = 0; d < report.delays.size(); ++d) {
            curve += fmt::format("{},{},{}\n", s.name, report.delays[d],
                                 metric_columns(s.by_delay[d]));
        }
    }
    write_text(dir / "delay_curve.csv", curve);

    std::string signals = "series_id,batch_index,status\n";
    for (const auto& series : report.drift_signals) {
        for (const auto& s : series) {
            signals += fmt::format("{},{},{}\n", s.series_id, s.batch_index, to_string(s.status));
        }
    }
    write_text(dir / "drift_signals.csv", signals);

    std::string periods = "period,fraction\n";
    for (std::size_t p = 0; p < report.drift_fraction.size(); ++p) {
        periods += fmt::format("{},{}\n", p, format_double(report.drift_fraction[p]));
    }
    write_text(dir / "drift_summary.csv", periods);

    for (const auto& name : report.scenarios) {
        std::string events = "series_id,batch_index,trigger,train_start,train_end\n";
        for (const auto& r : report.results) {
            if (r.scenario != name) continue;
            for (const auto& e : r.record.retrains) {
                events += fmt::format("{},{},{},{},{}\n", r.series_id, e.batch_index,
                                      to_string(e.trigger), e.train_range.begin,
                                      e.train_range.end);
            }
        }
        write_text(dir / fmt::format("retrain_events.{}.csv", name), events);
    }

    auto records = ordered_json::array();
    for (const auto& r : report.results) records.push_back(record_json(r));
    write_text(dir / "run_records.json", records.dump(1) + "\n");
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

// --- Subcommands -------------------------------------------------------------

namespace {

std::int64_t now_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

int cmd_validate(const fs::path& config_path, std::ostream& out, std::ostream& err) {
    try {
        const auto config = load_experiment_config(config_path);
        out << fmt::format("{}: ok ({} regimes, {} delays, {} seeds)\n", config_path.string(),
                           config.regimes.size(), config.delays.size(), config.seeds.size());
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_run(const fs::path& config_path, int jobs, const std::optional<fs::path>& output_override,
            std::ostream& err) {
    const auto started = now_seconds();
    ExperimentConfig config;
    std::string config_bytes;
    try {
        config = load_experiment_config(config_path);
        config_bytes = read_file(config_path);
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    if (output_override) config.output_dir = *output_override;

    std::vector<LabeledSeries> corpus;
    try {
        corpus = load_dataset(config);
        if (corpus.empty()) throw DataError("dataset contains no series");
    } catch (const std::exception& e) {
        err << "data error: " << e.what() << '\n';
        return kExitDataError;
    }
    spdlog::info("loaded {} series", corpus.size());

    try {
        const auto report = run_experiment(config, corpus, jobs);
        write_report(report, config.output_dir);

        ordered_json manifest;
        manifest["config_hash"] = sha256_hex(config_bytes);
        manifest["toolkit_version"] = kToolkitVersion;
        manifest["config_path"] = config_path.string();
        manifest["started_at"] = format_iso8601(started);
        manifest["finished_at"] = format_iso8601(now_seconds());
        manifest["jobs"] = jobs;
        std::map<std::pair<std::string, std::string>, std::string> failed;
        for (const auto& f : report.failures) failed[{f.scenario, f.series_id}] = f.error;
        auto status = ordered_json::array();
        for (const auto& scenario : report.scenarios) {
            for (const auto& id : report.series_ids) {
                ordered_json s{{"scenario", scenario}, {"series_id", id}};
                if (const auto it = failed.find({scenario, id}); it != failed.end()) {
                    s["status"] = "failed";
                    s["error"] = it->second;
                } else {
                    s["status"] = "ok";
                }
                status.push_back(std::move(s));
            }
        }
        manifest["series"] = std::move(status);
        std::ofstream(config.output_dir / "manifest.json") << manifest.dump(2) << '\n';

        for (const auto& f : report.failures) {
            err << fmt::format("series failure [{}] {}\n", f.scenario, f.error);
        }
        return report.failures.empty() ? kExitOk : kExitPartialFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

namespace {

std::map<std::string, std::map<std::string, MetricTriple>> read_summary(const fs::path& path) {
    const auto text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte);
        throw DataError(fmt::format("{}: JSON syntax error at line {}, column {}",
                                    path.string(), line, column));
    }
    if (!j.is_object() || !j.contains("per_series") || !j.at("per_series").is_object()) {
        throw DataError(fmt::format("{}: not a summary report (no per_series object)",
                                    path.string()));
    }
    std::map<std::string, std::map<std::string, MetricTriple>> out;
    for (const auto& [scenario, series] : j.at("per_series").items()) {
        auto& m = out[scenario];
        for (const auto& [id, v] : series.items()) {
            m[id] = {v.at("precision").get<double>(), v.at("recall").get<double>(),
                     v.at("f1").get<double>()};
        }
    }
    return out;
}

std::string symmetric_difference(const std::map<std::string, MetricTriple>& a,
                                 const std::map<std::string, MetricTriple>& b) {
    std::vector<std::string> only_a;
    std::vector<std::string> only_b;
    for (const auto& [id, m] : a) {
        if (!b.count(id)) only_a.push_back(id);
    }
    for (const auto& [id, m] : b) {
        if (!a.count(id)) only_b.push_back(id);
    }
    if (only_a.empty() && only_b.empty()) return {};
    return fmt::format("only in A: [{}]; only in B: [{}]", fmt::join(only_a, ", "),
                       fmt::join(only_b, ", "));
}

}  // namespace

int cmd_compare(const fs::path& summary_a, const fs::path& summary_b,
                const CompareOptions& options, std::ostream& out, std::ostream& err) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        err << "config error: alpha must be in (0, 1)\n";
        return kExitConfigError;
    }
    try {
        const auto a = read_summary(summary_a);
        const auto b = read_summary(summary_b);
        std::vector<std::pair<std::string, std::string>> pairs;
        if (options.scenario_a || options.scenario_b) {
            pairs.emplace_back(options.scenario_a.value_or(options.scenario_b.value_or("")),
                               options.scenario_b.value_or(options.scenario_a.value_or("")));
        } else {
            for (const auto& [name, series] : a) {
                if (b.count(name)) pairs.emplace_back(name, name);
            }
            if (pairs.empty()) throw DataError("the two reports share no scenario name");
        }

        ordered_json result;
        result["alpha"] = options.alpha;
        auto comparisons = ordered_json::array();
        bool any_test = false;
        for (const auto& [na, nb] : pairs) {
            const auto ia = a.find(na);
            const auto ib = b.find(nb);
            if (ia == a.end()) throw DataError(fmt::format("report A has no scenario '{}'", na));
            if (ib == b.end()) throw DataError(fmt::format("report B has no scenario '{}'", nb));
            if (const auto diff = symmetric_difference(ia->second, ib->second); !diff.empty()) {
                throw DataError(fmt::format("series sets differ for '{}' vs '{}': {}", na, nb,
                                            diff));
            }
            for (const auto& e :
                 compare_scenarios(na, ia->second, nb, ib->second, options.alpha)) {
                if (e.test) any_test = true;
                else err << fmt::format("{} vs {} ({}): {}\n", na, nb, e.metric, e.error);
                comparisons.push_back(comparison_json(e));
            }
        }
        result["comparisons"] = std::move(comparisons);
        out << result.dump(2) << '\n';
        return any_test ? kExitOk : kExitDataError;
    } catch (const std::exception& e) {
        err << "data error: " << e.what() << '\n';
        return kExitDataError;
    }
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_csv, std::ostream& err) {
    SynthSpec spec;
    try {
        std::string text;
        try {
            text = read_file(spec_path);
        } catch (const Error& e) {
            throw ConfigError("", e.what());
        }
        spec = synth_spec_from_json(parse_json_text(text, spec_path));
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    try {
        write_labeled_csv(generate_synthetic(spec), out_csv);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitOk;
}

void configure_logging_from_env() {
    auto logger = spdlog::get("driftbench");
    if (!logger) logger = spdlog::stderr_color_mt("driftbench");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("DRIFTBENCH_LOG"); env && *env) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string_view(env) != "off") {
            spdlog::warn("DRIFTBENCH_LOG='{}' is not a level; using warn", env);
        } else {
            spdlog::set_level(level);
        }
    }
}

}  // namespace driftbench
