#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zoi/clustering.hpp"
#include "zoi/corpus.hpp"
#include "zoi/coverage.hpp"
#include "zoi/error.hpp"
#include "zoi/export.hpp"
#include "zoi/ingest.hpp"
#include "zoi/store.hpp"

// End-to-end driver: store -> corpus -> filters -> DBSCAN noise removal ->
// X-Means -> coverage -> GeoJSON.
namespace zoi::pipeline {

struct PipelineConfig {
    std::filesystem::path store_dir;
    std::optional<std::filesystem::path> corpus_csv;  // read this instead of the store
    std::optional<corpus::BoundingBox> bbox = corpus::study_area();  // nullopt: no purge
    std::optional<corpus::KeywordQuery> keywords;                    // nullopt: keep all
    clustering::XMeansConfig xmeans{10, 10, {}};
    std::optional<clustering::DbscanConfig> dbscan = clustering::DbscanConfig{};  // nullopt: skip
    std::size_t vertex_count = coverage::kDefaultVertexCount;
    bool include_members = false;
    std::filesystem::path output_path;  // empty: do not write
    EarthModel earth;
};

struct CorpusStage {
    std::vector<corpus::CorpusRecord> records;  // ready for clustering
    std::vector<corpus::CorpusRecord> purged;   // outside the bounding box
    std::size_t loaded = 0;
    std::size_t after_keywords = 0;
    std::size_t duplicates = 0;
};

struct ClusterStage {
    std::vector<corpus::CorpusRecord> members;  // records that reached X-Means
    std::vector<corpus::CorpusRecord> noise;    // dropped by DBSCAN
    clustering::Labeling labeling;              // over members
};

struct PipelineResult {
    CorpusStage corpus;
    ClusterStage clusters;
    std::vector<coverage::CoverageSummary> summaries;
    std::vector<coverage::CoverageCircle> circles;
    exporter::ZoneDocument document;
    std::string report;
};

inline std::vector<GeoPoint> positions(const std::vector<corpus::CorpusRecord>& records) {
    std::vector<GeoPoint> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.position);
    return out;
}

inline CorpusStage prepare_corpus(const PipelineConfig& cfg) {
    CorpusStage stage;
    std::vector<corpus::CorpusRecord> records;
    if (cfg.corpus_csv) {
        std::ifstream in(*cfg.corpus_csv, std::ios::binary);
        if (!in) throw IoError("cannot open corpus file " + cfg.corpus_csv->string());
        records = corpus::read_csv(in);
    } else {
        const auto db = store::DocumentStore::open(cfg.store_dir, store::OpenMode::read_only);
        records = corpus::load_corpus(db);
    }
    stage.loaded = records.size();
    if (cfg.keywords) records = corpus::filter_keywords(records, *cfg.keywords);
    stage.after_keywords = records.size();
    if (cfg.bbox) {
        auto split = corpus::filter_bbox(records, *cfg.bbox);
        records = std::move(split.inside);
        stage.purged = std::move(split.purged);
    }
    const std::size_t before = records.size();
    stage.records = corpus::dedupe(records);
    stage.duplicates = before - stage.records.size();
    if (stage.records.empty()) throw EmptyCorpusError();
    return stage;
}

inline ClusterStage cluster_corpus(const std::vector<corpus::CorpusRecord>& records, const PipelineConfig& cfg) {
    ClusterStage stage;
    if (cfg.dbscan) {
        const auto labels = clustering::dbscan(positions(records), *cfg.dbscan);
        for (std::size_t i = 0; i < records.size(); ++i) {
            (labels.assignment[i] ? stage.members : stage.noise).push_back(records[i]);
        }
    } else {
        stage.members = records;
    }
    if (stage.members.empty()) throw EmptyCorpusError();
    stage.labeling = clustering::xmeans(positions(stage.members), cfg.xmeans);
    return stage;
}

inline std::vector<exporter::MemberPoint> member_points(const ClusterStage& stage) {
    std::vector<exporter::MemberPoint> out;
    out.reserve(stage.members.size());
    for (std::size_t i = 0; i < stage.members.size(); ++i) {
        out.push_back({stage.members[i].position, *stage.labeling.assignment[i], stage.members[i].text});
    }
    return out;
}

// Replaces path atomically (write to a sibling temp file, then rename).
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline void validate(const PipelineConfig& cfg) {
    if (cfg.vertex_count < 3) throw ConfigError("vertex_count must be at least 3");
    if (cfg.xmeans.k_min == 0 || cfg.xmeans.k_min > cfg.xmeans.k_max) {
        throw ConfigError("X-Means needs 1 <= k_min <= k_max");
    }
    validate(cfg.earth);
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    validate(cfg);
    PipelineResult result;
    result.corpus = prepare_corpus(cfg);
    result.clusters = cluster_corpus(result.corpus.records, cfg);
    result.report = clustering::format_report(result.clusters.labeling);
    result.summaries = coverage::summarize(result.clusters.labeling, positions(result.clusters.members), cfg.earth);
    result.circles = coverage::circles_for(result.summaries, cfg.vertex_count, cfg.earth);
    result.document = exporter::export_geojson(result.summaries, result.circles, member_points(result.clusters),
                                               cfg.include_members, cfg.keywords ? &*cfg.keywords : nullptr);
    if (!cfg.output_path.empty()) write_file_atomic(cfg.output_path, result.document.dump());
    return result;
}

// ---------------------------------------------------------------------------
// Ingestion

struct IngestReport {
    store::StoreStats stats;
    ingest::ReplaySummary replay;
    std::vector<ingest::ReplayFailure> failures;
    std::size_t stored = 0;
};

// Replays a fixture directory into the store. Photo geo entities take their
// name from a search-page stub with the same id when one is present; stubs
// without a geo entity are stored with a null location.
inline IngestReport ingest_command(const std::filesystem::path& input_dir, ingest::SourceKind kind,
                                   const std::filesystem::path& store_dir) {
    ingest::ReplaySource source(input_dir, kind);
    auto db = store::DocumentStore::open(store_dir, store::OpenMode::read_write);
    IngestReport report;

    std::vector<ingest::RawPhotoGeo> geos;
    std::vector<ingest::RawPhotoStub> stubs;
    while (auto rec = source.next()) {
        if (const auto* tweet = std::get_if<ingest::RawTweet>(&rec->payload)) {
            db.put(store::Collection::tweet, store::tweet_body(*tweet));
            ++report.stored;
        } else if (const auto* page = std::get_if<ingest::PhotoSearchPage>(&rec->payload)) {
            stubs.insert(stubs.end(), page->stubs.begin(), page->stubs.end());
        } else {
            geos.push_back(std::get<ingest::RawPhotoGeo>(rec->payload));
        }
    }

    std::map<std::string, std::string> titles;
    for (const auto& s : stubs) titles.emplace(s.id, s.title);
    std::map<std::string, bool> located;
    for (const auto& g : geos) {
        const auto it = titles.find(g.photo_id);
        db.put(store::Collection::photo, store::photo_body(g, it == titles.end() ? "" : it->second));
        located[g.photo_id] = true;
        ++report.stored;
    }
    for (const auto& s : stubs) {
        if (located.count(s.id)) continue;
        db.put(store::Collection::photo, store::photo_body(std::nullopt, s.title));
        located[s.id] = true;
        ++report.stored;
    }

    report.replay = source.summary();
    report.failures = source.failures();
    report.stats = db.stats();
    return report;
}

}  // namespace zoi::pipeline
