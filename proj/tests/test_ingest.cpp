#include <gtest/gtest.h>

#include "driftbench/ingest.hpp"
#include "driftbench/synth.hpp"
#include "support/tempdir.hpp"

using namespace driftbench;
using testing_support::TempDir;

TEST(YahooLoader, IndexTimestampsAndLabels) {
    TempDir dir;
    dir.write("real_1.csv", "timestamp,value,is_anomaly\n1,5.0,0\n2,6.0,1\n");
    const auto series = load_yahoo_a1(dir.path());
    ASSERT_EQ(series.size(), 1u);
    EXPECT_EQ(series[0].id(), "real_1");
    EXPECT_EQ(series[0].size(), 2u);
    EXPECT_EQ(series[0].labels(), (Labels{0, 1}));
    EXPECT_EQ(series[0].values(), (Values{5.0, 6.0}));
    EXPECT_EQ(series[0].granularity_s(), 3600);
    EXPECT_EQ(series[0].points()[1].timestamp - series[0].points()[0].timestamp, 3600);
}

TEST(YahooLoader, BadValueNamesLine) {
    TempDir dir;
    dir.write("real_2.csv", "timestamp,value,is_anomaly\n1,abc,0\n2,1,0\n");
    try {
        load_yahoo_a1(dir.path());
        FAIL() << "expected a parse error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("real_2.csv:2"), std::string::npos) << e.what();
    }
}

TEST(YahooLoader, HeaderAndDirectoryErrors) {
    TempDir dir;
    EXPECT_THROW(load_yahoo_a1(dir.path() / "missing"), Error);
    EXPECT_THROW(load_yahoo_a1(dir.path()), Error);  // no CSV files
    dir.write("a.csv", "time,value\n1,2\n");
    EXPECT_THROW(load_yahoo_a1(dir.path()), Error);
}

TEST(YahooLoader, SortedByIdAndDeterministic) {
    TempDir dir;
    for (const char* name : {"c", "a", "b"}) {
        dir.write(std::string(name) + ".csv", "timestamp,value,is_anomaly\n1,1,0\n2,2,0\n3,3,1\n");
    }
    const auto first = load_yahoo_a1(dir.path());
    const auto second = load_yahoo_a1(dir.path());
    ASSERT_EQ(first.size(), 3u);
    EXPECT_EQ(first[0].id(), "a");
    EXPECT_EQ(first[2].id(), "c");
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(first[i].values(), second[i].values());
        EXPECT_EQ(first[i].labels(), second[i].labels());
    }
}

TEST(GapRepair, InterpolatesMissingSamples) {
    std::vector<RawSample> raw;
    for (std::int64_t i = 0; i < 40; ++i) {
        if (i == 10) continue;
        raw.push_back({i * 60, static_cast<double>(i), 0});
    }
    const auto s = assemble_series("g", 60, raw);
    ASSERT_EQ(s.size(), 40u);
    EXPECT_DOUBLE_EQ(s.values()[10], 10.0);
    EXPECT_EQ(s.labels()[10], 0);
}

TEST(GapRepair, RejectsTooManyMissing) {
    std::vector<RawSample> raw;
    for (std::int64_t i = 0; i < 40; i += 2) raw.push_back({i * 60, 1.0, 0});
    EXPECT_THROW(assemble_series("g", 60, raw), Error);
}

TEST(GapRepair, RejectsBadOrdering) {
    EXPECT_THROW(assemble_series("g", 60, {{0, 1, 0}, {120, 1, 0}, {60, 1, 0}}), Error);
    EXPECT_THROW(assemble_series("g", 60, {{0, 1, 0}, {90, 1, 0}}), Error);
}

TEST(NabLoader, LabelsMatchListedTimestamps) {
    TempDir dir;
    dir.write("data/ec2_cpu.csv",
              "timestamp,value\n2014-02-14 14:30:00,1.0\n2014-02-14 14:35:00,2.0\n"
              "2014-02-14 14:40:00,3.0\n");
    const auto labels = dir.write(
        "labels.json", R"({"realAWSCloudwatch/ec2_cpu.csv": ["2014-02-14 14:35:00.000000"]})");
    const auto series = load_nab_cloudwatch(dir.path() / "data", labels);
    ASSERT_EQ(series.size(), 1u);
    EXPECT_EQ(series[0].labels(), (Labels{0, 1, 0}));
    EXPECT_EQ(series[0].granularity_s(), 300);
}

TEST(NabLoader, UnknownLabelTimestampIsError) {
    TempDir dir;
    dir.write("data/x.csv", "timestamp,value\n2014-02-14 14:30:00,1.0\n2014-02-14 14:35:00,2.0\n");
    const auto labels = dir.write("labels.json", R"({"x.csv": ["2015-01-01 00:00:00"]})");
    EXPECT_THROW(load_nab_cloudwatch(dir.path() / "data", labels), Error);
}

TEST(NabLoader, MissingEntryMeansNoLabels) {
    TempDir dir;
    dir.write("data/x.csv", "timestamp,value\n2014-02-14 14:30:00,1.0\n2014-02-14 14:35:00,2.0\n");
    const auto labels = dir.write("labels.json", "{}");
    const auto series = load_nab_cloudwatch(dir.path() / "data", labels);
    EXPECT_EQ(series[0].labels(), (Labels{0, 0}));
}

TEST(Iso8601, Formats) {
    EXPECT_EQ(parse_iso8601("1970-01-01 00:00:00"), 0);
    EXPECT_EQ(parse_iso8601("1970-01-02T00:00:01Z"), 86401);
    EXPECT_EQ(parse_iso8601("2014-02-14 14:35:00.000000"), 1392388500);
    EXPECT_THROW(parse_iso8601("2014-02-30 00:00:00"), Error);
    EXPECT_THROW(parse_iso8601("yesterday"), Error);
}

TEST(Manifest, SyntheticAgainstYahooReportsCount) {
    SynthSpec spec;
    spec.length = 800;
    spec.seed = 1;
    const auto report = validate_manifest({generate_synthetic(spec)}, yahoo_a1_manifest());
    ASSERT_FALSE(report.empty());
    EXPECT_EQ(report.front().field, "series_count");
    EXPECT_NE(report.front().detail.find("1"), std::string::npos);
    EXPECT_NE(report.front().detail.find("67"), std::string::npos);
}

TEST(Manifest, MatchingCorpusIsClean) {
    std::vector<LabeledSeries> corpus;
    for (int i = 0; i < 3; ++i) {
        SynthSpec spec;
        spec.id = "s" + std::to_string(i);
        spec.length = i == 0 ? 10 : (i == 1 ? 20 : 15);
        spec.seed = static_cast<std::uint64_t>(i);
        corpus.push_back(generate_synthetic(spec));
    }
    EXPECT_TRUE(validate_manifest(corpus, {"toy", 3, 3600, 10, 20}).empty());
    const auto report = validate_manifest(corpus, {"toy", 3, 300, 12, 20});
    EXPECT_FALSE(report.empty());
}

TEST(CsvRoundTrip, WriteThenLoadIsExact) {
    TempDir dir;
    SynthSpec spec;
    spec.id = "rt";
    spec.length = 300;
    spec.noise_sigma = 1.3;
    spec.base.season_amplitude = 2.0;
    spec.base.season_period = 24;
    spec.anomalies = {{40, AnomalyKind::Spike, 9.0}};
    spec.seed = 77;
    const auto s = generate_synthetic(spec);
    write_labeled_csv(s, dir.path() / "rt.csv");
    const auto loaded = load_yahoo_a1(dir.path());
    ASSERT_EQ(loaded.size(), 1u);
    EXPECT_EQ(loaded[0].values(), s.values());
    EXPECT_EQ(loaded[0].labels(), s.labels());
}
