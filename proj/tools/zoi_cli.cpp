// zoi: ingest geotagged social-media fixtures and mine zones of interest.
//
//   zoi ingest   --input DIR --kind tweet|photo --store DIR
//   zoi cluster  --store DIR [filters] [clustering]       cluster report
//   zoi coverage --store DIR [filters] [clustering]       per-cluster radii
//   zoi export   --store DIR [...] --output zones.geojson
//   zoi pipeline --store DIR [...] --output zones.geojson report + GeoJSON

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "zoi/clustering.hpp"
#include "zoi/corpus.hpp"
#include "zoi/error.hpp"
#include "zoi/ingest.hpp"
#include "zoi/pipeline.hpp"
#include "zoi/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitEmptyCorpus = 2;

struct PipelineFlags {
    std::string store_dir;
    std::string corpus_csv;
    std::string corpus_out;
    std::vector<double> bbox;
    bool no_bbox = false;
    std::vector<std::string> keywords;
    std::string keyword_mode = "any";
    std::size_t k_min = 10;
    std::size_t k_max = 10;
    std::size_t max_iterations = 100;
    double tolerance = 1e-7;
    std::size_t restarts = 8;
    std::uint64_t seed = zoi::clustering::kDefaultSeed;
    unsigned threads = 1;
    double eps_km = 5.0;
    std::size_t min_pts = 5;
    bool no_dbscan = false;
    std::size_t vertex_count = zoi::coverage::kDefaultVertexCount;
    bool include_members = false;
    std::string output;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f, bool needs_output) {
    auto* input = cmd->add_option_group("input");
    input->add_option("--store", f.store_dir, "Document store directory");
    input->add_option("--corpus", f.corpus_csv, "Read a corpus CSV instead of the store");
    input->require_option(1);

    cmd->add_option("--bbox", f.bbox, "Study area MIN_LAT MAX_LAT MIN_LON MAX_LON")
        ->expected(4)
        ->default_str("5.90 6.60 -75.80 -75.10");
    cmd->add_flag("--no-bbox", f.no_bbox, "Do not purge records outside the study area");
    cmd->add_option("--keyword", f.keywords, "Keep records containing this term (repeatable)");
    cmd->add_option("--keyword-mode", f.keyword_mode, "Term combination")
        ->check(CLI::IsMember({"any", "all"}))
        ->capture_default_str();
    cmd->add_option("--k-min", f.k_min, "X-Means minimum cluster count")->capture_default_str();
    cmd->add_option("--k-max", f.k_max, "X-Means maximum cluster count")->capture_default_str();
    cmd->add_option("--max-iterations", f.max_iterations, "Lloyd iteration cap")->capture_default_str();
    cmd->add_option("--tolerance", f.tolerance, "Centroid displacement tolerance (degrees)")
        ->capture_default_str();
    cmd->add_option("--restarts", f.restarts, "k-means++ restarts")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Clustering seed (ZONE_SEED overrides)")->capture_default_str();
    cmd->add_option("--threads", f.threads, "Worker threads")->capture_default_str();
    cmd->add_option("--eps-km", f.eps_km, "DBSCAN neighborhood radius (km)")->capture_default_str();
    cmd->add_option("--min-pts", f.min_pts, "DBSCAN core-point threshold")->capture_default_str();
    cmd->add_flag("--no-dbscan", f.no_dbscan, "Skip density-based noise removal");
    cmd->add_option("--vertex-count", f.vertex_count, "Coverage polygon vertices")->capture_default_str();
    cmd->add_flag("--include-members", f.include_members, "Emit member points in the GeoJSON");
    cmd->add_option("--corpus-out", f.corpus_out, "Write the filtered corpus as CSV");
    auto* out = cmd->add_option("--output", f.output, "GeoJSON output path");
    if (needs_output) out->required();
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* raw = std::getenv("ZONE_SEED");
    if (!raw) return fallback;
    const std::string_view s(raw);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw zoi::ConfigError("ZONE_SEED must be a decimal unsigned integer, got '" + std::string(s) + "'");
    }
    return value;
}

zoi::pipeline::PipelineConfig to_config(const PipelineFlags& f) {
    zoi::pipeline::PipelineConfig cfg;
    cfg.store_dir = f.store_dir;
    if (!f.corpus_csv.empty()) cfg.corpus_csv = f.corpus_csv;
    if (f.no_bbox) {
        cfg.bbox.reset();
    } else if (!f.bbox.empty()) {
        try {
            cfg.bbox = zoi::corpus::BoundingBox(f.bbox[0], f.bbox[1], f.bbox[2], f.bbox[3]);
        } catch (const zoi::DomainError& e) {
            throw zoi::ConfigError(std::string("--bbox: ") + e.what());
        }
    }
    if (!f.keywords.empty()) {
        cfg.keywords.emplace(f.keywords,
                             f.keyword_mode == "all" ? zoi::corpus::MatchMode::all : zoi::corpus::MatchMode::any);
    }
    cfg.xmeans.k_min = f.k_min;
    cfg.xmeans.k_max = f.k_max;
    cfg.xmeans.inner.max_iterations = f.max_iterations;
    cfg.xmeans.inner.tolerance = f.tolerance;
    cfg.xmeans.inner.restarts = f.restarts;
    cfg.xmeans.inner.seed = seed_from_env(f.seed);
    cfg.xmeans.inner.threads = f.threads;
    if (f.no_dbscan) {
        cfg.dbscan.reset();
    } else {
        cfg.dbscan = zoi::clustering::DbscanConfig{f.eps_km, f.min_pts, f.threads, cfg.earth};
    }
    cfg.vertex_count = f.vertex_count;
    cfg.include_members = f.include_members;
    cfg.output_path = f.output;
    return cfg;
}

void maybe_write_corpus(const PipelineFlags& f, const zoi::pipeline::CorpusStage& stage) {
    if (f.corpus_out.empty()) return;
    std::ofstream out(f.corpus_out, std::ios::binary);
    if (!out) throw zoi::IoError("cannot write " + f.corpus_out);
    zoi::corpus::write_csv(out, stage.records);
}

void log_stages(const zoi::pipeline::CorpusStage& c, const zoi::pipeline::ClusterStage& k) {
    std::cerr << "corpus: " << c.loaded << " loaded, " << c.after_keywords << " after keywords, "
              << c.purged.size() << " purged, " << c.duplicates << " duplicates, " << k.noise.size()
              << " noise, " << k.members.size() << " clustered\n";
}

int run_ingest(const std::string& input, const std::string& kind, const std::string& store_dir) {
    const auto report = zoi::pipeline::ingest_command(input, zoi::ingest::parse_source_kind(kind), store_dir);
    for (const auto& f : report.failures) {
        std::cerr << "skipped " << f.filename << ": " << f.message << "\n";
    }
    std::cout << "parsed " << report.replay.parsed << ", skipped " << report.replay.skipped << ", stored "
              << report.stored << "\n"
              << "tweet_count=" << report.stats.tweet_count << " photo_count=" << report.stats.photo_count
              << "\n";
    return kExitOk;
}

int run_cluster(const PipelineFlags& f) {
    const auto cfg = to_config(f);
    zoi::pipeline::validate(cfg);
    const auto corpus = zoi::pipeline::prepare_corpus(cfg);
    maybe_write_corpus(f, corpus);
    const auto clusters = zoi::pipeline::cluster_corpus(corpus.records, cfg);
    log_stages(corpus, clusters);
    std::cout << zoi::clustering::format_report(clusters.labeling);
    return kExitOk;
}

int run_coverage(const PipelineFlags& f) {
    auto cfg = to_config(f);
    cfg.output_path.clear();
    const auto result = zoi::pipeline::run_pipeline(cfg);
    maybe_write_corpus(f, result.corpus);
    log_stages(result.corpus, result.clusters);
    using zoi::text::format_double;
    for (const auto& s : result.summaries) {
        std::cout << "Cluster " << s.cluster.index << "\tmembers " << s.member_count << "\tcentroid "
                  << format_double(s.centroid.position.lat_deg()) << " "
                  << format_double(s.centroid.position.lon_deg()) << "\tdistant "
                  << format_double(s.distant_point.lat_deg()) << " " << format_double(s.distant_point.lon_deg())
                  << "\tradius_km " << format_double(s.radius.value()) << "\n";
    }
    return kExitOk;
}

int run_export(const PipelineFlags& f, bool print_report) {
    const auto result = zoi::pipeline::run_pipeline(to_config(f));
    maybe_write_corpus(f, result.corpus);
    log_stages(result.corpus, result.clusters);
    if (print_report) std::cout << result.report;
    std::cerr << "wrote " << f.output << " (" << result.summaries.size() << " zones)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zones of interest from geotagged social-media records"};
    app.require_subcommand(1);

    std::string input_dir, kind = "tweet", ingest_store;
    auto* ingest = app.add_subcommand("ingest", "Replay a fixture directory into the store");
    ingest->add_option("--input", input_dir, "Directory of JSON (tweet) or XML (photo) files")->required();
    ingest->add_option("--kind", kind, "tweet or photo")
        ->check(CLI::IsMember({"tweet", "photo"}))
        ->capture_default_str();
    ingest->add_option("--store", ingest_store, "Document store directory")->required();

    PipelineFlags cluster_flags, coverage_flags, export_flags, pipeline_flags;
    auto* cluster = app.add_subcommand("cluster", "Print X-Means cluster centers");
    add_pipeline_flags(cluster, cluster_flags, false);
    auto* coverage = app.add_subcommand("coverage", "Print per-cluster coverage radii");
    add_pipeline_flags(coverage, coverage_flags, false);
    auto* exporter = app.add_subcommand("export", "Write zones as GeoJSON");
    add_pipeline_flags(exporter, export_flags, true);
    auto* pipeline = app.add_subcommand("pipeline", "Cluster, print the report and write GeoJSON");
    add_pipeline_flags(pipeline, pipeline_flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (*ingest) return run_ingest(input_dir, kind, ingest_store);
        if (*cluster) return run_cluster(cluster_flags);
        if (*coverage) return run_coverage(coverage_flags);
        if (*exporter) return run_export(export_flags, false);
        if (*pipeline) return run_export(pipeline_flags, true);
    } catch (const zoi::EmptyCorpusError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyCorpus;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
