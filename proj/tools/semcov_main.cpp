// Command-line front end: ingest embeddings, run the curation loops, score
// predictions, render projection figures, and emit a synthetic demo world.
//
// Exit codes: 0 success, 2 input/validation, 3 unresolved reference,
// 4 external hook failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "semcov/curator.hpp"
#include "semcov/dataset.hpp"
#include "semcov/density.hpp"
#include "semcov/errors.hpp"
#include "semcov/eval.hpp"
#include "semcov/hooks.hpp"
#include "semcov/jsonl_io.hpp"
#include "semcov/projection.hpp"
#include "semcov/qa_items.hpp"
#include "semcov/rng.hpp"

namespace {

using namespace semcov;
namespace fs = std::filesystem;

// --- ingest --------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string format = "jsonl";
    std::string vectors;
    std::string index;
    std::size_t dim = 0;
    std::string output;
};

void cmd_ingest(const IngestArgs& args) {
    Dataset d;
    if (args.format == "jsonl") {
        if (args.input.empty()) throw ValidationError("ingest: --input is required for jsonl");
        d = ingest_jsonl(args.input);
    } else if (args.format == "binary") {
        if (args.vectors.empty() || args.index.empty() || args.dim == 0)
            throw ValidationError("ingest: binary format needs --vectors, --index and --dim");
        d = ingest_binary(args.vectors, args.index, args.dim);
    } else {
        throw ValidationError("ingest: unknown format '" + args.format + "'");
    }
    atomic_write(args.output, export_jsonl(d));
    std::cout << "ingested " << d.size() << " records (dim " << d.dim() << ") -> "
              << args.output << "\n";
}

// --- curate --------------------------------------------------------------------

struct CurateArgs {
    std::string phase = "all";
    std::string pool;
    std::string corpus;
    std::string interest;
    std::string out_dir;
    std::string config_path;
    std::string generator = "echo";
    std::string embedder = "anchored";
    CuratorConfig overrides;
    bool has_t_c = false, has_t_d = false, has_h = false, has_epsilon = false;
    bool has_seed = false, has_max_rounds = false, has_batch_size = false;
    std::string batch_strategy;
    std::string threshold_mode;
};

CuratorConfig resolve_config(const CurateArgs& args) {
    CuratorConfig config;
    if (!args.config_path.empty()) config = CuratorConfig::from_json_file(args.config_path);
    if (args.has_t_c) config.t_c = args.overrides.t_c;
    if (args.has_t_d) config.t_d = args.overrides.t_d;
    if (args.has_h) config.h = args.overrides.h;
    if (args.has_epsilon) config.epsilon = args.overrides.epsilon;
    if (args.has_seed) config.seed = args.overrides.seed;
    if (args.has_max_rounds) config.max_rounds = args.overrides.max_rounds;
    if (args.has_batch_size) config.batch_size = args.overrides.batch_size;
    if (!args.batch_strategy.empty()) config.batch_strategy = parse_strategy(args.batch_strategy);
    if (!args.threshold_mode.empty()) {
        if (args.threshold_mode == "percentile")
            config.threshold_mode = ThresholdMode::Percentile;
        else if (args.threshold_mode == "literal")
            config.threshold_mode = ThresholdMode::Literal;
        else
            throw ValidationError("curate: unknown threshold mode '" + args.threshold_mode + "'");
    }
    config.validate();
    return config;
}

// "remote" without a URL pulls the encoder endpoint from the environment;
// this is the only environment-variable input the tool has.
std::string resolve_embedder_spec(std::string spec) {
    if (spec == "remote") {
        const char* env = std::getenv("SEMCOV_ENCODER_ENDPOINT");
        if (env == nullptr || *env == '\0')
            throw ValidationError(
                "embedder 'remote' needs a URL: pass remote:<url> or set "
                "SEMCOV_ENCODER_ENDPOINT");
        spec = "remote:" + std::string(env);
    }
    return spec;
}

void write_pipeline_outputs(const fs::path& out_dir, const PipelineResult& res, bool corpus_too) {
    fs::create_directories(out_dir);
    if (corpus_too) atomic_write(out_dir / "corpus.jsonl", export_jsonl(res.corpus));
    atomic_write(out_dir / "questions.jsonl", export_jsonl(res.questions));
    atomic_write(out_dir / "qa_items.jsonl", qa_to_jsonl(res.qa_items));
    atomic_write(out_dir / "trace.jsonl", res.trace.to_jsonl());
}

void cmd_curate(const CurateArgs& args) {
    const CuratorConfig config = resolve_config(args);
    std::vector<QAItem> interest;
    if (!args.interest.empty()) interest = read_qa_jsonl(args.interest);

    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    if (args.phase == "corpus") {
        if (args.pool.empty()) throw ValidationError("curate: --pool is required");
        const Dataset pool = ingest_jsonl(args.pool, DatasetRole::Space);
        const BatchPartition partition =
            partition_batches(pool, config.batch_strategy, config.batch_size, config.seed);
        const ExpandResult res = expand_corpus(pool, partition, config);
        atomic_write(out_dir / "corpus.jsonl", export_jsonl(res.corpus));
        atomic_write(out_dir / "trace.jsonl", res.trace.to_jsonl());
        std::cout << "corpus: " << res.corpus.size() << " of " << pool.size() << " records in "
                  << res.trace.rounds.size() << " rounds (" << res.trace.terminated_reason
                  << ") -> " << out_dir.string() << "\n";
        return;
    }

    const auto generator = make_generator(args.generator, config.seed);
    const auto embedder = make_embedder(resolve_embedder_spec(args.embedder));

    if (args.phase == "qa") {
        if (args.corpus.empty()) throw ValidationError("curate: --phase qa needs --corpus");
        const Dataset corpus = ingest_jsonl(args.corpus, DatasetRole::Corpus);
        const PipelineResult res = run_qa_phase(corpus, interest, config, *generator, *embedder);
        write_pipeline_outputs(out_dir, res, false);
        std::cout << "questions: " << res.questions.size() << " over " << corpus.size()
                  << " corpus records in " << res.trace.rounds.size() << " rounds ("
                  << res.trace.terminated_reason << ") -> " << out_dir.string() << "\n";
        return;
    }

    if (args.phase != "all") throw ValidationError("curate: unknown phase '" + args.phase + "'");
    if (args.pool.empty()) throw ValidationError("curate: --pool is required");
    const Dataset pool = ingest_jsonl(args.pool, DatasetRole::Space);
    const PipelineResult res = run_pipeline(pool, interest, config, *generator, *embedder);
    write_pipeline_outputs(out_dir, res, true);
    std::cout << "corpus: " << res.corpus.size() << " of " << pool.size()
              << " records; questions: " << res.questions.size() << "; rounds: "
              << res.trace.rounds.size() << " (" << res.trace.terminated_reason << ") -> "
              << out_dir.string() << "\n";
}

// --- eval ----------------------------------------------------------------------

struct EvalArgs {
    std::string benchmark;
    std::string predictions;
    std::string report_path;
    std::string table_path;
    std::string group_by = "level,format,source";
};

void cmd_eval(const EvalArgs& args) {
    std::vector<std::string> keys;
    {
        std::string cur;
        for (char c : args.group_by + ",") {
            if (c == ',') {
                if (!cur.empty()) keys.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        for (const auto& k : keys)
            if (k != "level" && k != "format" && k != "source")
                throw ValidationError("eval: unknown group-by key '" + k +
                                      "' (expected level, format, source)");
        if (keys.empty()) throw ValidationError("eval: empty --group-by");
    }

    const std::vector<QAItem> items = read_qa_jsonl(args.benchmark);
    const std::vector<Prediction> preds = read_predictions_jsonl(args.predictions);
    const EvalReport report = evaluate(preds, items);

    const bool fine = std::find(keys.begin(), keys.end(), "level") != keys.end() ||
                      std::find(keys.begin(), keys.end(), "source") != keys.end();
    const bool rollup = std::find(keys.begin(), keys.end(), "format") != keys.end();
    const std::string table = report.to_table(fine, rollup);

    if (!args.report_path.empty()) atomic_write(args.report_path, report.to_json().dump(2) + "\n");
    if (!args.table_path.empty())
        atomic_write(args.table_path, table);
    else
        std::cout << table;
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

// --- report --------------------------------------------------------------------

struct ReportArgs {
    std::string trace;
    std::string corpus;
    std::string questions;
    std::string pool;
    std::string out_dir;
    double h = 5.0;
    double epsilon = 0.05;
};

void cmd_report(const ReportArgs& args) {
    const CurationTrace trace = CurationTrace::from_jsonl(args.trace);
    if (trace.rounds.empty()) throw ValidationError("report: the trace has no rounds");
    const Dataset corpus = ingest_jsonl(args.corpus, DatasetRole::Corpus);
    Dataset questions;
    if (!args.questions.empty()) questions = ingest_jsonl(args.questions, DatasetRole::Questions);
    Dataset pool;
    if (!args.pool.empty()) pool = ingest_jsonl(args.pool, DatasetRole::Space);

    // sanity: the trace's final sizes must fit the datasets it narrates
    std::size_t final_corpus = 0;
    std::size_t final_questions = 0;
    for (const auto& rec : trace.rounds) {
        final_corpus = std::max(final_corpus, rec.corpus_size);
        final_questions = std::max(final_questions, rec.question_size);
    }
    if (final_corpus > corpus.size())
        throw ValidationError("report: trace describes " + std::to_string(final_corpus) +
                              " corpus records but the corpus file has " +
                              std::to_string(corpus.size()));
    if (!questions.empty() && final_questions > questions.size())
        throw ValidationError("report: trace describes " + std::to_string(final_questions) +
                              " questions but the questions file has " +
                              std::to_string(questions.size()));

    // shared basis so frames are comparable across rounds
    Dataset fit("fit", DatasetRole::Space, corpus.dim());
    for (const auto& rec : (pool.empty() ? corpus : pool).records()) fit.add(rec);
    for (const auto& rec : questions.records())
        if (!fit.contains(rec.id)) fit.add(rec);
    const PcaBasis basis = PcaBasis::fit(fit);

    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    const KdeParams params{args.h};

    int width = 1;
    for (std::size_t r = trace.rounds.size(); r >= 10; r /= 10) ++width;

    // datasets append in admission order, so the size counters in the trace
    // delimit per-round membership exactly
    std::size_t corpus_so_far = 0;
    std::size_t questions_so_far = 0;
    std::vector<std::string> ids;
    for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
        const RoundRecord& rec = trace.rounds[k];
        const std::size_t prev_corpus = corpus_so_far;
        corpus_so_far = std::max(corpus_so_far, rec.corpus_size);
        questions_so_far = std::max(questions_so_far, rec.question_size);

        ids.clear();
        for (std::size_t i = 0; i < prev_corpus; ++i) ids.push_back(corpus.at(i).id);
        const Dataset existing = corpus.subset(ids, "existing");
        ids.clear();
        for (std::size_t i = prev_corpus; i < corpus_so_far; ++i) ids.push_back(corpus.at(i).id);
        const Dataset fresh = corpus.subset(ids, "new");
        ids.clear();
        const std::size_t q_take = questions.empty() ? 0 : questions_so_far;
        for (std::size_t i = 0; i < std::min(q_take, questions.size()); ++i)
            ids.push_back(questions.at(i).id);
        const Dataset asked = questions.empty()
                                  ? Dataset("q", DatasetRole::Questions, corpus.dim())
                                  : questions.subset(ids, "questions");

        std::vector<std::pair<const Dataset*, std::string>> layers;
        if (!existing.empty()) layers.push_back({&existing, "existing"});
        if (!fresh.empty()) layers.push_back({&fresh, "new"});
        if (!asked.empty()) layers.push_back({&asked, "questions"});

        Dataset gap_set;
        if (!pool.empty() && corpus_so_far > 0) {
            ids.clear();
            for (std::size_t i = 0; i < corpus_so_far; ++i) ids.push_back(corpus.at(i).id);
            const Dataset current = corpus.subset(ids, "current");
            const double cutoff = std::clamp(args.epsilon, 0.0, 1.0);
            const GapSet gap =
                select_gap(pool, current, params, cutoff, cutoff, ThresholdMode::Literal);
            ids.clear();
            for (const auto& id : gap.point_ids)
                if (pool.contains(id)) ids.push_back(id);
            gap_set = pool.subset(ids, "gap");
            if (!gap_set.empty()) layers.push_back({&gap_set, "gap"});
        }

        const ProjectionFrame frame = project_frame(basis, layers);
        char name[64];
        std::snprintf(name, sizeof(name), "round-%0*zu", width, rec.round);
        atomic_write(out_dir / (std::string(name) + ".csv"), frame.to_csv());
        const std::string title = std::string(name) + " [" + rec.phase + "] " + rec.batch_id;
        atomic_write(out_dir / (std::string(name) + ".svg"), frame_to_svg(frame, title));
    }
    std::cout << "wrote " << trace.rounds.size() << " frames -> " << out_dir.string() << "\n";
}

// --- fixture -------------------------------------------------------------------

struct FixtureArgs {
    std::string out_dir;
    std::uint64_t seed = 1;
    std::size_t points = 600;
    std::size_t dim = 16;
    std::size_t clusters = 4;
};

void cmd_fixture(const FixtureArgs& args) {
    if (args.points == 0 || args.points > 5000)
        throw ValidationError("fixture: --points must be in [1, 5000]");
    if (args.dim < 2 || args.dim > 64) throw ValidationError("fixture: --dim must be in [2, 64]");
    if (args.clusters == 0 || args.clusters > args.dim)
        throw ValidationError("fixture: --clusters must be in [1, dim]");

    Rng rng(args.seed);
    Dataset pool("pool", DatasetRole::Space, args.dim);
    Json entity_lines = Json::array();

    for (std::size_t i = 0; i < args.points; ++i) {
        const std::size_t c = i % args.clusters;
        const std::string topic = "topic" + std::to_string(c);
        const std::string section = "sec" + std::to_string(i % 5);
        const std::string author = "author" + std::to_string(i % 7);
        const std::string id = "rec" + std::to_string(i);
        const std::string title = "Article " + std::to_string(i);

        EmbeddingRecord rec;
        rec.id = id;
        rec.source = topic;
        rec.text = title + " (" + section + ", " + author + ")";
        rec.vector.assign(args.dim, 0.0);
        rec.vector[c] = 12.0;                        // cluster center
        rec.vector[(c + 1) % args.dim] += 0.4 * static_cast<double>(i % 5); // section shade
        for (auto& v : rec.vector) v += rng.gauss();
        pool.add(rec);

        Json e;
        e["entity_id"] = id;
        e["entity_type"] = "article";
        e["attributes"] = Json{{"topic", topic},
                               {"section", section},
                               {"author", author},
                               {"title", title}};
        entity_lines.push_back(std::move(e));
    }

    const Json templates = {
        {"binary",
         Json::array({Json{{"id", "b-topic"},
                           {"entity_type", "article"},
                           {"text", "Is {title} filed under {topic}?"},
                           {"target_field", "topic"}}})},
        {"mcq",
         Json::array({Json{{"id", "m-section"},
                           {"entity_type", "article"},
                           {"text", "Which section holds {title}?"},
                           {"target_field", "section"}},
                      Json{{"id", "m-author"},
                           {"entity_type", "article"},
                           {"text", "Who wrote {title}?"},
                           {"target_field", "author"}}})},
        {"maq",
         Json::array({Json{{"id", "q-shelf"},
                           {"entity_type", "article"},
                           {"text", "Which articles did {author} write in {topic} {section}?"},
                           {"condition_fields", Json::array({"author", "topic", "section"})},
                           {"answer_field", "title"}}})},
    };

    Json interest = Json::array();
    for (std::size_t c = 0; c + 1 < args.clusters && c < 4; ++c) {
        QAItem item;
        item.qid = "interest-" + std::to_string(c);
        item.format = QaFormat::Open;
        item.level = CogLevel::KC;
        item.question = "How does topic" + std::to_string(c) + " relate to topic" +
                        std::to_string(c + 1) + "?";
        item.gold = {"They are adjacent shelves in the fixture world."};
        item.provenance = Provenance::Forum;
        interest.push_back(item.to_json());
    }

    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    atomic_write(out_dir / "pool.jsonl", export_jsonl(pool));
    std::string entity_text;
    for (const auto& e : entity_lines) entity_text += e.dump() + "\n";
    atomic_write(out_dir / "entities.jsonl", entity_text);
    atomic_write(out_dir / "templates.json", templates.dump(2) + "\n");
    std::string interest_text;
    for (const auto& j : interest) interest_text += j.dump() + "\n";
    atomic_write(out_dir / "interest.jsonl", interest_text);

    std::cout << "fixture: " << pool.size() << " records (dim " << pool.dim() << ", "
              << args.clusters << " clusters) -> " << out_dir.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semcov: density-guided corpus and benchmark curation"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Validate and canonicalize an embedding dataset");
    ingest->add_option("--input", ingest_args.input, "JSONL input path");
    ingest->add_option("--format", ingest_args.format, "jsonl or binary")
        ->check(CLI::IsMember({"jsonl", "binary"}));
    ingest->add_option("--vectors", ingest_args.vectors, "binary vectors file (float32 rows)");
    ingest->add_option("--index", ingest_args.index, "binary index JSONL");
    ingest->add_option("--dim", ingest_args.dim, "vector dimension (binary format)");
    ingest->add_option("--output", ingest_args.output, "canonical JSONL output")->required();

    CurateArgs curate_args;
    auto* curate = app.add_subcommand("curate", "Run the corpus/QA curation loops");
    curate->set_help_flag("--help", "Print this help message and exit"); // frees -h for --h
    curate->add_option("--phase", curate_args.phase, "all, corpus, or qa")
        ->check(CLI::IsMember({"all", "corpus", "qa"}));
    curate->add_option("--pool", curate_args.pool, "reference pool JSONL");
    curate->add_option("--corpus", curate_args.corpus, "existing corpus JSONL (--phase qa)");
    curate->add_option("--interest", curate_args.interest, "user-interest QA items JSONL");
    curate->add_option("--out-dir", curate_args.out_dir, "output directory")->required();
    curate->add_option("--config", curate_args.config_path, "JSON config file");
    auto* o_tc = curate->add_option("--t-c", curate_args.overrides.t_c, "admission threshold");
    auto* o_td = curate->add_option("--t-d", curate_args.overrides.t_d, "gap fill fraction");
    auto* o_h = curate->add_option("--h", curate_args.overrides.h, "kernel bandwidth");
    auto* o_eps = curate->add_option("--epsilon", curate_args.overrides.epsilon, "gap slack");
    auto* o_seed = curate->add_option("--seed", curate_args.overrides.seed, "random seed");
    auto* o_max = curate->add_option("--max-rounds", curate_args.overrides.max_rounds,
                                     "round budget per loop");
    auto* o_bs = curate->add_option("--batch-size", curate_args.overrides.batch_size,
                                    "fixed-size batch size");
    curate->add_option("--batch-strategy", curate_args.batch_strategy, "by_source or fixed_size");
    curate->add_option("--threshold-mode", curate_args.threshold_mode,
                       "percentile or literal t_d semantics");
    curate->add_option("--generator", curate_args.generator,
                       "echo, exec:<cmd>, http(s)://<url>, or "
                       "template:<entities>,<templates>[,<per-round>]");
    curate->add_option("--embedder", curate_args.embedder,
                       "hash, anchored, or remote[:<url>] (remote reads "
                       "SEMCOV_ENCODER_ENDPOINT when no URL is given)");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against a benchmark");
    eval_cmd->add_option("--benchmark", eval_args.benchmark, "QA items JSONL")->required();
    eval_cmd->add_option("--predictions", eval_args.predictions, "predictions JSONL")->required();
    eval_cmd->add_option("--report", eval_args.report_path, "JSON report output");
    eval_cmd->add_option("--table", eval_args.table_path, "text table output (default stdout)");
    eval_cmd->add_option("--group-by", eval_args.group_by,
                         "comma list of level, format, source");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Render per-round projection frames");
    report->set_help_flag("--help", "Print this help message and exit"); // frees -h for --h
    report->add_option("--trace", report_args.trace, "curation trace JSONL")->required();
    report->add_option("--corpus", report_args.corpus, "curated corpus JSONL")->required();
    report->add_option("--questions", report_args.questions, "questions JSONL");
    report->add_option("--pool", report_args.pool, "reference pool (enables the gap overlay)");
    report->add_option("--h", report_args.h, "bandwidth for the gap overlay");
    report->add_option("--epsilon", report_args.epsilon, "gap slack for the overlay");
    report->add_option("--out-dir", report_args.out_dir, "output directory")->required();

    FixtureArgs fixture_args;
    auto* fixture = app.add_subcommand("fixture", "Emit a synthetic demo world");
    fixture->add_option("--out-dir", fixture_args.out_dir, "output directory")->required();
    fixture->add_option("--seed", fixture_args.seed, "random seed");
    fixture->add_option("--points", fixture_args.points, "pool size (max 5000)");
    fixture->add_option("--dim", fixture_args.dim, "embedding dimension (max 64)");
    fixture->add_option("--clusters", fixture_args.clusters, "topic cluster count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "semcov: " << e.what() << "\n";
        return 2;
    }

    curate_args.has_t_c = o_tc->count() > 0;
    curate_args.has_t_d = o_td->count() > 0;
    curate_args.has_h = o_h->count() > 0;
    curate_args.has_epsilon = o_eps->count() > 0;
    curate_args.has_seed = o_seed->count() > 0;
    curate_args.has_max_rounds = o_max->count() > 0;
    curate_args.has_batch_size = o_bs->count() > 0;

    try {
        if (ingest->parsed()) cmd_ingest(ingest_args);
        if (curate->parsed()) cmd_curate(curate_args);
        if (eval_cmd->parsed()) cmd_eval(eval_args);
        if (report->parsed()) cmd_report(report_args);
        if (fixture->parsed()) cmd_fixture(fixture_args);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "semcov: " << e.what() << "\n";
        return 2;
    } catch (const ReferenceError& e) {
        std::cerr << "semcov: " << e.what() << "\n";
        return 3;
    } catch (const HookError& e) {
        std::cerr << "semcov: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "semcov: " << e.what() << "\n";
        return 2;
    }
}
