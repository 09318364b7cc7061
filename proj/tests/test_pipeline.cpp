#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "test_paths.hpp"
#include "zoi/pipeline.hpp"

using namespace zoi::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class PipelineTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::path(::testing::TempDir()) /
                ("pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    fs::path make_store() {
        const auto dir = root_ / "store";
        data_ = zoi::fixtures::write_ten_blob_store(dir);
        return dir;
    }

    fs::path root_;
    zoi::fixtures::TenBlob data_;
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(PipelineTest, TenBlobStoreGivesTenZones) {
    PipelineConfig cfg;
    cfg.store_dir = make_store();
    cfg.output_path = root_ / "zones.geojson";
    const auto result = run_pipeline(cfg);
    EXPECT_EQ(result.report.substr(0, result.report.find('\n')), "Cluster centers : 10 centers");
    EXPECT_EQ(count_lines(result.report), 11u);
    EXPECT_EQ(result.corpus.loaded, 301u);
    EXPECT_EQ(result.corpus.purged.size(), 1u);
    EXPECT_EQ(result.summaries.size(), 10u);
    const auto written = nlohmann::json::parse(slurp(cfg.output_path));
    EXPECT_EQ(oracle::geojson_problem(written), "");
    EXPECT_EQ(slurp(cfg.output_path), result.document.dump());
}

TEST_F(PipelineTest, OutOfAreaPointNeverReachesOutput) {
    PipelineConfig cfg;
    cfg.store_dir = make_store();
    cfg.include_members = true;
    const auto result = run_pipeline(cfg);
    for (const auto& f : result.document.json["features"]) {
        if (f["geometry"]["type"] != "Point") continue;
        EXPECT_NE(f["geometry"]["coordinates"][1].get<double>(), zoi::fixtures::kPhiladelphia.lat_deg());
    }
    for (const auto& r : result.clusters.members) EXPECT_NE(r.text, "Fiesta bug");

    // Without the box, density-based noise removal drops it instead.
    cfg.bbox.reset();
    cfg.dbscan = zoi::clustering::DbscanConfig{50.0, 5, 1, {}};
    const auto open = run_pipeline(cfg);
    ASSERT_EQ(open.clusters.noise.size(), 1u);
    EXPECT_EQ(open.clusters.noise[0].text, "Fiesta bug");
}

TEST_F(PipelineTest, KeywordFilterAndTopTerms) {
    PipelineConfig cfg;
    cfg.store_dir = make_store();
    cfg.keywords = zoi::corpus::KeywordQuery({"Medellín", "Fiesta", "4sq.com"});
    const auto result = run_pipeline(cfg);
    EXPECT_LT(result.corpus.after_keywords, result.corpus.loaded);
    for (const auto& r : result.clusters.members) EXPECT_TRUE(cfg.keywords->matches(r.text)) << r.text;
    EXPECT_FALSE(result.document.json["features"][0]["properties"]["top_terms"].empty());
}

TEST_F(PipelineTest, EmptyCorpus) {
    {
        auto db = zoi::store::DocumentStore::open(root_ / "empty");
        db.put(zoi::store::Collection::tweet, zoi::store::tweet_body({std::nullopt, "web", "sin geo"}));
    }
    PipelineConfig cfg;
    cfg.store_dir = root_ / "empty";
    EXPECT_THROW(run_pipeline(cfg), zoi::EmptyCorpusError);
}

TEST_F(PipelineTest, OutputIndependentOfThreadCount) {
    PipelineConfig cfg;
    cfg.store_dir = make_store();
    cfg.include_members = true;
    std::string first;
    for (unsigned threads : {1u, 2u, 4u, 8u}) {
        cfg.xmeans.inner.threads = threads;
        cfg.dbscan->threads = threads;
        const auto dump = run_pipeline(cfg).document.dump();
        if (first.empty()) first = dump;
        EXPECT_EQ(dump, first) << threads << " threads";
    }
}

TEST_F(PipelineTest, CorpusCsvRoundTripGivesSameZones) {
    PipelineConfig cfg;
    cfg.store_dir = make_store();
    const auto from_store = run_pipeline(cfg);
    {
        std::ofstream out(root_ / "corpus.csv", std::ios::binary);
        zoi::corpus::write_csv(out, from_store.corpus.records);
    }
    PipelineConfig csv_cfg;
    csv_cfg.corpus_csv = root_ / "corpus.csv";
    EXPECT_EQ(run_pipeline(csv_cfg).document.dump(), from_store.document.dump());
}

TEST_F(PipelineTest, IngestTweets) {
    const auto in = root_ / "tweets";
    fs::create_directories(in);
    const auto sample = slurp(test_paths::fixture("tweet_philadelphia.json"));
    for (int i = 0; i < 3; ++i) std::ofstream(in / ("t" + std::to_string(i) + ".json")) << sample;
    const auto report = ingest_command(in, zoi::ingest::SourceKind::tweet, root_ / "store");
    EXPECT_EQ(report.stats.tweet_count, 3u);
    EXPECT_EQ(report.stored, 3u);
    EXPECT_TRUE(report.failures.empty());
}

TEST_F(PipelineTest, IngestEmptyAndMixedDirectories) {
    const auto empty = root_ / "empty_in";
    fs::create_directories(empty);
    EXPECT_EQ(ingest_command(empty, zoi::ingest::SourceKind::tweet, root_ / "s1").stats,
              (zoi::store::StoreStats{0, 0}));

    const auto mixed = root_ / "mixed";
    fs::create_directories(mixed);
    std::ofstream(mixed / "a.json") << slurp(test_paths::fixture("tweet_philadelphia.json"));
    std::ofstream(mixed / "b.json") << "{\"coordinates\": ";
    std::ofstream(mixed / "c.json") << R"({"coordinates": null, "text": "x", "source": "web"})";
    const auto report = ingest_command(mixed, zoi::ingest::SourceKind::tweet, root_ / "s2");
    EXPECT_EQ(report.stats.tweet_count, 2u);
    ASSERT_EQ(report.failures.size(), 1u);
    EXPECT_EQ(report.failures[0].filename, "b.json");
}

TEST_F(PipelineTest, IngestPhotosJoinsTitles) {
    const auto in = root_ / "photos";
    fs::create_directories(in);
    fs::copy_file(test_paths::fixture("photo_search_page2.xml"), in / "page2.xml");
    fs::copy_file(test_paths::fixture("photo_geo_123.xml"), in / "geo_123.xml");
    const auto report = ingest_command(in, zoi::ingest::SourceKind::photo, root_ / "store");
    // One located photo plus the four stubs without a geo entity.
    EXPECT_EQ(report.stats.photo_count, 5u);
    const auto db = zoi::store::DocumentStore::open(root_ / "store", zoi::store::OpenMode::read_only);
    EXPECT_EQ(db.scan(zoi::store::Collection::photo, true).size(), 1u);
}

TEST_F(PipelineTest, CliExitCodesAndOutput) {
    const std::string cli = ZOI_CLI;
    const auto store = make_store();
    const auto out = root_ / "cli.geojson";
    const auto log = root_ / "log.txt";

    EXPECT_EQ(run(cli + " pipeline --store " + store.string() + " --output " + out.string() + " > " + log.string() +
                  " 2> /dev/null"),
              0);
    EXPECT_EQ(slurp(log).rfind("Cluster centers : 10 centers\n", 0), 0u);
    EXPECT_EQ(count_lines(slurp(log)), 11u);
    EXPECT_EQ(oracle::geojson_problem(nlohmann::json::parse(slurp(out))), "");

    PipelineConfig cfg;
    cfg.store_dir = store;
    EXPECT_EQ(slurp(out), run_pipeline(cfg).document.dump());

    {
        auto db = zoi::store::DocumentStore::open(root_ / "empty");
        db.put(zoi::store::Collection::tweet, zoi::store::tweet_body({std::nullopt, "web", "x"}));
    }
    EXPECT_EQ(run(cli + " cluster --store " + (root_ / "empty").string() + " > /dev/null 2>&1"), 2);
    EXPECT_EQ(run(cli + " cluster --store " + store.string() + " --k-min 5 --k-max 2 > /dev/null 2>&1"), 1);
    EXPECT_EQ(run(cli + " cluster > /dev/null 2>&1"), 1);
    EXPECT_EQ(run(cli + " cluster --store " + (root_ / "missing").string() + " > /dev/null 2>&1"), 1);
}

TEST_F(PipelineTest, CliSeedFromEnvironment) {
    const std::string cli = ZOI_CLI;
    const auto store = make_store();
    const auto a = root_ / "a.geojson", b = root_ / "b.geojson";
    ASSERT_EQ(run("ZONE_SEED=7 " + cli + " export --store " + store.string() + " --output " + a.string() +
                  " > /dev/null 2>&1"),
              0);
    ASSERT_EQ(run(cli + " export --store " + store.string() + " --seed 7 --output " + b.string() +
                  " > /dev/null 2>&1"),
              0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(run("ZONE_SEED=abc " + cli + " cluster --store " + store.string() + " > /dev/null 2>&1"), 1);
}
