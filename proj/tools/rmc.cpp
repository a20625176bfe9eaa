// rmc command line: ingest, index, train, eval, recommend, serve.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmc/rmc.hpp"
#include "rmc/service.hpp"

using namespace rmc;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct FusionFlags {
    double alpha = 0.6;
    std::string attention = "attention";
    std::string combine = "linear";

    void add(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "reference weight in [0,1]")->capture_default_str();
        cmd->add_option("--attention", attention, "attention | average")->capture_default_str();
        cmd->add_option("--combine", combine, "linear | concatenation")->capture_default_str();
    }

    [[nodiscard]] FusionConfig config() const {
        FusionConfig f;
        f.alpha = alpha;
        f.attention = parse_attention_mode(attention);
        f.combine = parse_combine_mode(combine);
        f.validate();
        return f;
    }
};

// A model file or a pair of precomputed stores.
struct ProviderFlags {
    std::string model;
    std::string content_store;
    std::string reference_store;

    void add(CLI::App* cmd) {
        auto* m = cmd->add_option("--model", model, "shallow model file");
        auto* c = cmd->add_option("--content-store", content_store, "content vectors keyed by paper id");
        auto* r = cmd->add_option("--reference-store", reference_store, "vectors keyed by normalized reference title");
        c->needs(r);
        r->needs(c);
        m->excludes(c);
        m->excludes(r);
    }
};

struct LoadedProvider {
    std::optional<ShallowModel> model;
    std::optional<EmbeddingStore> content;
    std::optional<EmbeddingStore> references;
    std::unique_ptr<EmbeddingProvider> provider;
};

LoadedProvider load_provider(const ProviderFlags& flags) {
    LoadedProvider out;
    if (!flags.model.empty()) {
        out.model = load_model(flags.model);
        out.provider = std::make_unique<ShallowProvider>(*out.model);
    } else if (!flags.content_store.empty()) {
        out.content = load_store(flags.content_store);
        out.references = load_store(flags.reference_store, out.content->dim());
        out.provider = std::make_unique<StoreProvider>(*out.content, *out.references);
    } else {
        throw Error(ErrorCode::InvalidArgument, "need --model or --content-store/--reference-store");
    }
    return out;
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

std::vector<SamplingRatio> parse_ratio_list(const std::string& list) {
    std::vector<SamplingRatio> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        out.push_back(parse_ratio(list.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

nlohmann::ordered_json history_json(const std::vector<EpochRecord>& history) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& e : history) {
        nlohmann::ordered_json j;
        j["epoch"] = e.epoch;
        j["mean_loss"] = e.mean_loss;
        j["instances"] = e.instances;
        j["hard_instances"] = e.hard_instances;
        j["refreshes"] = e.refreshes;
        if (e.monitor) j["monitor"] = to_json(*e.monitor, NdcgReport::Both, false);
        rows.push_back(std::move(j));
    }
    return rows;
}

// ---- ingest

struct IngestArgs {
    std::string corpus, labels, out_corpus, out_labels;
    bool synthetic = false;
    std::size_t clusters = 10;
};

void cmd_ingest(const IngestArgs& a, const Globals& g) {
    Corpus corpus;
    LabelSet labels;
    bool have_labels = false;
    if (a.synthetic) {
        SyntheticSpec spec;
        spec.clusters = a.clusters;
        spec.seed = g.seed;
        auto data = make_synthetic(spec);
        corpus = std::move(data.corpus);
        labels = std::move(data.labels);
        have_labels = true;
    } else {
        if (a.corpus.empty()) throw Error(ErrorCode::InvalidArgument, "need --corpus or --synthetic");
        corpus = load_corpus(a.corpus);
        if (!a.labels.empty()) {
            labels = load_labels(a.labels, corpus);
            have_labels = true;
        }
    }
    if (!a.out_corpus.empty()) save_corpus(corpus, a.out_corpus);
    if (have_labels && !a.out_labels.empty()) save_labels(labels, a.out_labels);
    nlohmann::ordered_json summary;
    summary["papers"] = corpus.size();
    if (have_labels) {
        summary["submissions"] = labels.size();
        summary["train"] = labels.in_split(Split::Train).size();
        summary["val"] = labels.in_split(Split::Val).size();
        summary["test"] = labels.in_split(Split::Test).size();
    }
    std::cout << summary.dump() << '\n';
}

// ---- index

struct IndexArgs {
    std::string corpus, labels, query, split = "test", scope = "core", out;
    double k1 = 1.2, b = 0.75;
    std::size_t k = kDefaultRecallK;
    bool exclude_cited = false;
};

void cmd_index(const IndexArgs& a, const Globals& g) {
    const auto corpus = load_corpus(a.corpus);
    const auto index = build_index(corpus, Bm25Params{a.k1, a.b});
    nlohmann::ordered_json out;
    out["documents"] = index.doc_count();
    out["avg_doc_length"] = index.avg_doc_length();
    out["k1"] = a.k1;
    out["b"] = a.b;
    if (!a.query.empty()) {
        auto hits = nlohmann::ordered_json::array();
        for (const auto& s : index.top_k(tokenize(a.query), a.k)) hits.push_back({{"id", s.id}, {"score", s.score}});
        out["results"] = std::move(hits);
    }
    if (!a.labels.empty()) {
        const auto labels = load_labels(a.labels, corpus);
        EvalOptions opts;
        const auto split = parse_split(a.split);
        if (!split) throw Error(ErrorCode::BadSplit, a.split);
        opts.split = *split;
        opts.scope = parse_scope(a.scope);
        opts.k = a.k;
        opts.exclude_cited = a.exclude_cited;
        opts.threads = g.threads;
        out["bm25"] = to_json(evaluate_bm25(index, corpus, labels, opts));
    }
    write_json(out, a.out);
}

// ---- train

struct TrainArgs {
    std::string corpus, labels, out, init, log, scope = "core", ratio = "1:1:1", sweep_ratio, report, monitor;
    std::uint32_t feature_dim = 4096, embed_dim = 64;
    double margin = 0.05, lr = 2e-5, weight_decay = 0.01;
    std::size_t kn = 100, refresh_every = 5000, epochs = 5;
    bool exclude_cited = false;
    FusionFlags fusion;
};

void cmd_train(const TrainArgs& a, const Globals& g) {
    const auto corpus = load_corpus(a.corpus);
    const auto labels = load_labels(a.labels, corpus);
    TrainConfig cfg;
    cfg.margin = a.margin;
    cfg.fusion = a.fusion.config();
    cfg.k_n = a.kn;
    cfg.refresh_every = a.refresh_every;
    cfg.ratio = parse_ratio(a.ratio);
    cfg.epochs = a.epochs;
    cfg.learning_rate = a.lr;
    cfg.weight_decay = a.weight_decay;
    cfg.seed = g.seed;
    cfg.scope = parse_scope(a.scope);
    cfg.exclude_cited = a.exclude_cited;
    cfg.threads = g.threads;
    if (!a.monitor.empty()) {
        const auto split = parse_split(a.monitor);
        if (!split) throw Error(ErrorCode::BadSplit, a.monitor);
        cfg.monitor_split = *split;
    }
    const auto initial = a.init.empty() ? ShallowModel::random(a.feature_dim, a.embed_dim, g.seed) : load_model(a.init);

    if (!a.sweep_ratio.empty()) {
        EvalOptions opts;
        opts.scope = cfg.scope;
        opts.exclude_cited = cfg.exclude_cited;
        opts.threads = g.threads;
        const auto rows = sweep_ratio(cfg, corpus, labels, initial, parse_ratio_list(a.sweep_ratio), opts);
        write_json(to_json(rows), a.report);
        return;
    }
    if (a.out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
    const auto result = train(cfg, corpus, labels, initial);
    save_model(result.model, a.out);
    const auto hist = history_json(result.history);
    if (!a.log.empty()) write_json(hist, a.log);
    for (const auto& e : result.history) {
        std::cerr << "epoch " << e.epoch << " loss " << e.mean_loss << " instances " << e.instances << '\n';
    }
}

// ---- eval

struct EvalArgs {
    std::string corpus, labels, split = "test", scope = "core", ndcg = "both", sweep_alpha, out;
    std::size_t k = kDefaultRecallK;
    bool exclude_cited = false, no_per_query = false;
    ProviderFlags provider;
    FusionFlags fusion;
};

void cmd_eval(const EvalArgs& a, const Globals& g) {
    const auto corpus = load_corpus(a.corpus);
    const auto labels = load_labels(a.labels, corpus);
    const auto loaded = load_provider(a.provider);
    EvalOptions opts;
    const auto split = parse_split(a.split);
    if (!split) throw Error(ErrorCode::BadSplit, a.split);
    opts.split = *split;
    opts.scope = parse_scope(a.scope);
    opts.k = a.k;
    opts.exclude_cited = a.exclude_cited;
    opts.threads = g.threads;
    const auto ndcg = parse_ndcg_report(a.ndcg);
    const auto fusion = a.fusion.config();
    if (!a.sweep_alpha.empty()) {
        const auto rows = sweep_alpha(*loaded.provider, corpus, labels, fusion, parse_grid(a.sweep_alpha), opts);
        write_json(to_json(rows, ndcg), a.out);
        return;
    }
    write_json(to_json(evaluate(*loaded.provider, corpus, labels, fusion, opts), ndcg, !a.no_per_query), a.out);
}

// ---- recommend / serve

struct RecommendArgs {
    std::string corpus, query, scope = "core";
    std::optional<std::size_t> k;
    bool exclude_cited = false;
    ProviderFlags provider;
    FusionFlags fusion;
};

void cmd_recommend(const RecommendArgs& a, const Globals& g) {
    const auto corpus = load_corpus(a.corpus);
    const auto loaded = load_provider(a.provider);
    std::ifstream in(a.query, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + a.query);
    auto req = parse_request(detail::read_all(in));
    if (a.k) {
        if (*a.k < 1) throw Error(ErrorCode::BadK, std::to_string(*a.k));
        req.k = *a.k;
    }
    const Recommender rec(corpus, *loaded.provider, a.fusion.config(), parse_scope(a.scope), a.exclude_cited,
                          g.threads);
    std::cout << to_json(rec.recommend(req)).dump() << '\n';
}

struct ServeArgs {
    std::string corpus, host = "127.0.0.1", scope = "core";
    int port = 8080;
    bool exclude_cited = false;
    ProviderFlags provider;
    FusionFlags fusion;
};

void cmd_serve(const ServeArgs& a, const Globals& g) {
    const auto corpus = load_corpus(a.corpus);
    const auto loaded = load_provider(a.provider);
    const Recommender rec(corpus, *loaded.provider, a.fusion.config(), parse_scope(a.scope), a.exclude_cited,
                          g.threads);

    // SIGINT/SIGTERM are handled on a dedicated thread via sigwait
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    httplib::Server server;
    install_routes(server, rec);
    const int port = a.port == 0 ? server.bind_to_any_port(a.host) : (server.bind_to_port(a.host, a.port) ? a.port : -1);
    if (port < 0) throw Error(ErrorCode::BindFailure, a.host + ":" + std::to_string(a.port));

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        server.stop();
    });
    std::cout << "listening on " << a.host << ":" << port << std::endl;
    server.listen_after_bind();
    // wake the waiter if the server stopped on its own
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    std::cout << "stopped" << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citation recommendation engine"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "seed for initialization, sampling and synthetic data")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "validate and normalize corpus/label files");
    ingest->add_option("--corpus", ia.corpus);
    ingest->add_option("--labels", ia.labels);
    ingest->add_option("--out-corpus", ia.out_corpus);
    ingest->add_option("--out-labels", ia.out_labels);
    ingest->add_flag("--synthetic", ia.synthetic, "generate the planted-cluster corpus instead of reading one");
    ingest->add_option("--clusters", ia.clusters)->capture_default_str();

    IndexArgs xa;
    auto* index = app.add_subcommand("index", "build a BM25 index; query it or evaluate the baseline");
    index->add_option("--corpus", xa.corpus)->required();
    index->add_option("--k1", xa.k1)->capture_default_str();
    index->add_option("--b", xa.b)->capture_default_str();
    index->add_option("--query", xa.query, "free-text query");
    index->add_option("--labels", xa.labels, "evaluate the baseline on these labels");
    index->add_option("--split", xa.split)->capture_default_str();
    index->add_option("--scope", xa.scope)->capture_default_str();
    index->add_option("--k", xa.k)->capture_default_str();
    index->add_flag("--exclude-cited", xa.exclude_cited);
    index->add_option("--out", xa.out);

    TrainArgs ta;
    auto* trn = app.add_subcommand("train", "train the shallow encoder");
    trn->add_option("--corpus", ta.corpus)->required();
    trn->add_option("--labels", ta.labels)->required();
    trn->add_option("--out", ta.out, "model file to write");
    trn->add_option("--init", ta.init, "start from this model instead of a random one");
    trn->add_option("--feature-dim", ta.feature_dim)->capture_default_str();
    trn->add_option("--embed-dim", ta.embed_dim)->capture_default_str();
    trn->add_option("--margin", ta.margin)->capture_default_str();
    trn->add_option("--kn", ta.kn)->capture_default_str();
    trn->add_option("--refresh-every", ta.refresh_every)->capture_default_str();
    trn->add_option("--ratio", ta.ratio, "P:H:E")->capture_default_str();
    trn->add_option("--epochs", ta.epochs)->capture_default_str();
    trn->add_option("--lr", ta.lr)->capture_default_str();
    trn->add_option("--weight-decay", ta.weight_decay)->capture_default_str();
    trn->add_option("--scope", ta.scope)->capture_default_str();
    trn->add_flag("--exclude-cited", ta.exclude_cited);
    trn->add_option("--monitor", ta.monitor, "split evaluated after each epoch");
    trn->add_option("--log", ta.log, "per-epoch history as JSON");
    trn->add_option("--sweep-ratio", ta.sweep_ratio, "comma-separated P:H:E list; retrains per ratio");
    trn->add_option("--report", ta.report, "sweep table output");
    ta.fusion.add(trn);

    EvalArgs ea;
    auto* evl = app.add_subcommand("eval", "rank a split and report metrics");
    evl->add_option("--corpus", ea.corpus)->required();
    evl->add_option("--labels", ea.labels)->required();
    evl->add_option("--split", ea.split)->capture_default_str();
    evl->add_option("--scope", ea.scope)->capture_default_str();
    evl->add_option("--k", ea.k)->capture_default_str();
    evl->add_option("--ndcg", ea.ndcg, "paper | normalized | both")->capture_default_str();
    evl->add_option("--sweep-alpha", ea.sweep_alpha, "lo:hi:step");
    evl->add_option("--out", ea.out);
    evl->add_flag("--exclude-cited", ea.exclude_cited);
    evl->add_flag("--no-per-query", ea.no_per_query);
    ea.provider.add(evl);
    ea.fusion.add(evl);

    RecommendArgs ra;
    auto* recmd = app.add_subcommand("recommend", "rank the corpus for one submission");
    recmd->add_option("--corpus", ra.corpus)->required();
    recmd->add_option("--query", ra.query, "JSON request file")->required();
    recmd->add_option("--k", ra.k);
    recmd->add_option("--scope", ra.scope)->capture_default_str();
    recmd->add_flag("--exclude-cited", ra.exclude_cited);
    ra.provider.add(recmd);
    ra.fusion.add(recmd);

    ServeArgs sa;
    auto* serve = app.add_subcommand("serve", "HTTP recommendation service");
    serve->add_option("--corpus", sa.corpus)->required();
    serve->add_option("--host", sa.host)->capture_default_str();
    serve->add_option("--port", sa.port, "0 picks a free port")->capture_default_str();
    serve->add_option("--scope", sa.scope)->capture_default_str();
    serve->add_flag("--exclude-cited", sa.exclude_cited);
    sa.provider.add(serve);
    sa.fusion.add(serve);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) cmd_ingest(ia, g);
        else if (*index) cmd_index(xa, g);
        else if (*trn) cmd_train(ta, g);
        else if (*evl) cmd_eval(ea, g);
        else if (*recmd) cmd_recommend(ra, g);
        else if (*serve) cmd_serve(sa, g);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
