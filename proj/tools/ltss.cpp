// Copyright 2026 The LTSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ltss/bench.hpp"
#include "ltss/datasets.hpp"
#include "ltss/directory_index.hpp"
#include "ltss/error.hpp"
#include "ltss/ingest.hpp"
#include "ltss/logical_table.hpp"
#include "ltss/partition.hpp"
#include "ltss/prefetch.hpp"
#include "ltss/replay.hpp"
#include "ltss/sql.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace {

using namespace ltss;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw IoError("cannot open " + path, errno);
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

Schema load_schema_arg(const std::string& arg) {
    if (auto s = builtin_schema(arg)) return *s;
    return load_schema_file(arg);
}

std::vector<double> parse_rates(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

// "none", "fixed:80" or "random:1-100" (milliseconds).
void parse_ooo(const std::string& text, ReplaySpec& spec) {
    if (text.empty() || text == "none") {
        spec.ooo = OooMode::none;
        return;
    }
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "fixed") {
        spec.ooo = OooMode::fixed;
        if (!arg.empty()) spec.fixed_delay_ms = std::stod(arg);
    } else if (kind == "random") {
        spec.ooo = OooMode::random;
        const auto dash = arg.find('-');
        if (dash != std::string::npos) {
            spec.random_lo_ms = std::stod(arg.substr(0, dash));
            spec.random_hi_ms = std::stod(arg.substr(dash + 1));
        }
    } else {
        throw ConfigError("--ooo expects none, fixed:<ms> or random:<lo>-<hi>");
    }
}

void print_counters(std::ostream& os, const IngestCounters& c) { os << to_string(c) << '\n'; }

// Subcommands

int cmd_create(const std::string& schema_arg, const std::string& path, std::uint64_t capacity,
               std::uint32_t partitions, bool no_sync) {
    const Schema schema = load_schema_arg(schema_arg);
    TableOptions opts;
    opts.capacity_records = capacity ? capacity : schema.options().capacity_records;
    opts.partitions = partitions ? partitions : schema.options().pipelines;
    opts.store.sync_each_batch = !no_sync;
    auto table = Table::create(path, schema, opts);
    std::cout << "created " << path << ": table " << schema.name() << ", " << schema.record_size()
              << "-byte records, " << opts.partitions << " partition(s) x " << opts.capacity_records << " records\n";
    return 0;
}

int cmd_serve(const std::string& path, const std::string& bind, std::uint16_t port, bool per_pipeline_ports,
              std::size_t queue, bool mpmc, double duration, double stats_every) {
    auto table = Table::open(path);
    PipelineConfig pc = pipeline_config_for(table->schema());
    pc.pipeline_count = static_cast<std::uint32_t>(table->partition_count());
    pc.bind_host = bind;
    pc.port = port;
    pc.per_pipeline_ports = per_pipeline_ports;
    if (queue) pc.queue_capacity = queue;
    if (mpmc) pc.discipline = QueueDiscipline::mpmc;
    IngestService service(*table, pc);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    service.start();
    std::cerr << "listening on " << bind << " port(s)";
    for (auto p : service.ports()) std::cerr << ' ' << p;
    std::cerr << " for table " << table->name() << " (" << pc.pipeline_count << " pipeline(s))\n";
    std::cerr.flush();
    const auto start = std::chrono::steady_clock::now();
    auto last_stats = start;
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        const auto now = std::chrono::steady_clock::now();
        if (duration > 0 && std::chrono::duration<double>(now - start).count() >= duration) break;
        if (stats_every > 0 && std::chrono::duration<double>(now - last_stats).count() >= stats_every) {
            print_counters(std::cerr, service.counters());
            last_stats = now;
        }
    }
    const IngestCounters c = service.stop_and_flush();
    print_counters(std::cout, c);
    return c.conserved() ? 0 : 1;
}

struct OpenTables {
    std::vector<std::unique_ptr<Table>> tables;
    std::vector<std::unique_ptr<LogicalTable>> logical;
    Catalog catalog;
    std::unique_ptr<PrefetchCache> cache;
};

void open_tables(OpenTables& t, const std::vector<std::string>& paths, std::size_t cache_bytes,
                 const std::string& combine) {
    for (const auto& p : paths) {
        t.tables.push_back(Table::open(p, OpenMode::read_only));
        t.logical.push_back(std::make_unique<LogicalTable>(*t.tables.back()));
        t.catalog.add(*t.logical.back());
    }
    if (cache_bytes) {
        t.cache = std::make_unique<PrefetchCache>(cache_bytes);
        t.catalog.set_cache(t.cache.get());
    }
    if (combine == "append") {
        t.catalog.force_combine = CombineMode::append;
    } else if (combine == "sort-merge") {
        t.catalog.force_combine = CombineMode::sort_merge;
    } else if (!combine.empty() && combine != "auto") {
        throw ConfigError("--combine expects auto, append or sort-merge");
    }
}

bool run_statement(OpenTables& t, const std::string& sql, std::ostream& out) {
    for (auto& table : t.tables) table->refresh();
    try {
        write_csv(out, execute_sql(sql, t.catalog));
        return true;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return false;
    }
}

int cmd_query(const std::vector<std::string>& paths, const std::string& statement, std::size_t cache_bytes,
              const std::string& combine, const std::string& out_path) {
    OpenTables t;
    open_tables(t, paths, cache_bytes, combine);
    Output out(out_path);
    if (!statement.empty()) return run_statement(t, statement, out.os()) ? 0 : 1;

    // Shell: statements end with ';'.
    const bool tty = ::isatty(STDIN_FILENO);
    bool ok = true;
    std::string buffer;
    std::string line;
    if (tty) std::cerr << "ltss> ";
    while (std::getline(std::cin, line)) {
        buffer += line;
        buffer += '\n';
        if (line.find(';') != std::string::npos) {
            ok = run_statement(t, buffer, out.os()) && ok;
            out.os().flush();
            buffer.clear();
        }
        if (tty) std::cerr << (buffer.empty() ? "ltss> " : "  ...> ");
    }
    if (buffer.find_first_not_of(" \t\r\n") != std::string::npos) ok = run_statement(t, buffer, out.os()) && ok;
    return ok ? 0 : 1;
}

Dataset dataset_from_args(const std::string& schema_arg, const std::string& csv, const std::string& gen,
                          std::size_t count, std::uint64_t seed) {
    if (!csv.empty()) {
        if (schema_arg.empty()) throw ConfigError("--csv needs --schema");
        return read_dataset_csv_file(load_schema_arg(schema_arg), csv);
    }
    return generate_dataset(gen.empty() ? (schema_arg.empty() ? "seismic" : schema_arg) : gen, count, seed);
}

int cmd_replay(const Dataset& data, ReplaySpec spec, const std::string& host, const std::vector<std::uint16_t>& ports) {
    const ReplayStats st = replay(data, spec, host, ports, &g_stop);
    std::cout << "sent,send_errors,delayed,seconds,achieved_rps\n"
              << st.sent << ',' << st.send_errors << ',' << st.delayed << ',' << st.seconds << ','
              << st.achieved_rate() << '\n';
    return st.send_errors == 0 ? 0 : 1;
}

int cmd_info(const std::string& path) {
    auto table = Table::open(path, OpenMode::read_only);
    const Schema& s = table->schema();
    std::cout << "table " << s.name() << "\nrecord_size " << s.record_size() << "\nprimary_time " << s.time_field().name
              << "\npartitions " << table->partition_count() << '\n';
    static constexpr const char* kLevels[] = {"year", "month", "day", "hour", "min", "sec"};
    for (std::size_t i = 0; i < table->partition_count(); ++i) {
        const Partition& p = table->partition(i);
        const RecordStore& st = p.store();
        const BlockMetadata m = st.metadata();
        const RecordRange live = st.live_window();
        std::cout << "partition " << i << ": path " << st.path() << ", capacity " << st.capacity() << ", total "
                  << st.total() << ", live [" << live.begin << ", " << live.end << "), generation " << m.generation;
        if (live.size() > 0) {
            std::cout << ", time " << CompositeTime::from_epoch(m.min_time).to_iso8601() << " .. "
                      << CompositeTime::from_epoch(m.max_time).to_iso8601();
        }
        const auto view = p.view();
        std::cout << "\n  index entries:";
        for (std::size_t g = 0; g < kGranularityCount; ++g) {
            std::cout << ' ' << kLevels[g] << '=' << view->entry_count(static_cast<Granularity>(g));
        }
        std::cout << ", memory " << view->memory_bytes() << " bytes\n";
    }
    std::cout << "index_memory_bytes " << table->index_memory_bytes() << '\n';
    return 0;
}

int cmd_recover_check(const std::string& path) {
    bool ok = true;
    auto table = Table::open(path, OpenMode::read_only);
    for (std::size_t i = 0; i < table->partition_count(); ++i) {
        const RecordStore& st = table->partition(i).store();
        const std::string ppath = Table::partition_path(path, static_cast<std::uint32_t>(i));
        std::cout << "partition " << i << ": generation " << st.generation() << ", total " << st.total();

        // Time order over the live window.
        const RecordRange live = st.live_window();
        std::uint64_t disorder = 0;
        for (std::uint64_t s = live.begin + 1; s < live.end; ++s) {
            if (st.time_at(s) < st.time_at(s - 1)) ++disorder;
        }
        std::cout << ", order " << (disorder ? "BROKEN" : "ok");
        ok = ok && disorder == 0;

        const LoadedIndex loaded = DirectoryIndex::load_snapshot(ppath + ".idx", st);
        std::cout << ", index snapshot " << to_string(loaded.status) << " (replayed " << loaded.replayed << ")";
        const auto rebuilt = DirectoryIndex::rebuild(st);
        const auto a = loaded.index->view();
        const auto b = rebuilt->view();
        bool same = true;
        for (std::size_t g = 0; g < kGranularityCount && same; ++g) {
            const auto gr = static_cast<Granularity>(g);
            // Compare the entries covering the live window.
            std::vector<std::pair<std::uint64_t, std::uint64_t>> ea;
            std::vector<std::pair<std::uint64_t, std::uint64_t>> eb;
            a->for_each_run(gr, live, [&](const IndexEntry& e, RecordRange r) { ea.emplace_back(r.begin, e.first_time.bits()); });
            b->for_each_run(gr, live, [&](const IndexEntry& e, RecordRange r) { eb.emplace_back(r.begin, e.first_time.bits()); });
            same = ea == eb;
        }
        std::cout << ", index " << (same ? "consistent" : "MISMATCH") << '\n';
        ok = ok && same;
    }
    std::cout << (ok ? "recover-check: ok" : "recover-check: FAILED") << '\n';
    return ok ? 0 : 1;
}

int cmd_load(const std::string& path, const std::string& csv, const std::string& gen, std::size_t count,
             std::uint64_t seed) {
    auto table = Table::open(path);
    Dataset data = !csv.empty() ? read_dataset_csv_file(table->schema(), csv)
                                : generate_dataset(gen.empty() ? table->schema().name() : gen, count, seed);
    if (data.schema().layout_hash() != table->schema().layout_hash()) {
        throw ConfigError("dataset schema does not match table " + table->name());
    }
    data.sort_by_time();
    const auto n = load_into(*table, data);
    table->snapshot_indexes();
    std::cout << "loaded " << n << " records into " << table->name() << '\n';
    return 0;
}

int cmd_bench_query(const std::string& suite, const std::vector<std::string>& paths, std::size_t gen_count,
                    int reps, std::uint64_t seed, const std::string& out_path) {
    const bool taxi = suite == "taxi";
    if (!taxi && suite != "energy") throw ConfigError("--suite expects taxi or energy");
    OpenTables t;
    std::string tmp;
    if (paths.empty()) {
        // Synthetic store in a temp directory.
        tmp = (std::filesystem::temp_directory_path() / ("ltss-bench-" + suite + "-" + std::to_string(::getpid()) + ".db"))
                  .string();
        Dataset data = generate_dataset(suite, gen_count, seed);
        TableOptions opts;
        opts.capacity_records = data.size() + 1024;
        opts.store.sync_each_batch = false;
        auto table = Table::create(tmp, data.schema(), opts);
        load_into(*table, data);
        t.tables.push_back(std::move(table));
        t.logical.push_back(std::make_unique<LogicalTable>(*t.tables.back()));
        t.catalog.add(*t.logical.back());
    } else {
        open_tables(t, paths, 0, "");
    }
    Output out(out_path);
    out.os() << "# suite=" << suite << " seed=" << seed << " reps=" << reps << '\n'
             << query_timing_csv_header() << '\n';
    for (const auto& qt : bench_query(t.catalog, taxi ? taxi_queries() : energy_queries(), reps)) {
        out.os() << query_timing_csv_row(qt) << '\n';
    }
    if (!tmp.empty()) {
        t.catalog = Catalog();
        t.logical.clear();
        t.tables.clear();
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        std::filesystem::remove(tmp + ".idx", ec);
    }
    return 0;
}

int cmd_bench_ingest(const std::string& dataset, std::size_t records, const std::string& pipelines_text,
                     const std::string& backend, double trial_seconds, std::uint64_t seed, const std::string& ooo,
                     std::uint32_t ratio, bool no_sync, const std::string& work_dir, const std::string& out_path) {
    const Dataset data = generate_dataset(dataset, records, seed);
    std::vector<IngestBackend> backends;
    if (backend == "ltss" || backend == "both") backends.push_back(IngestBackend::ltss);
    if (backend == "sqlite" || backend == "both") backends.push_back(IngestBackend::sqlite);
    if (backends.empty()) throw ConfigError("--backend expects ltss, sqlite or both");
    Output out(out_path);
    char host[256] = {};
    ::gethostname(host, sizeof host - 1);
    out.os() << "# host=" << host << " dataset=" << dataset << " records=" << records << " seed=" << seed
             << " ooo=" << ooo << " ratio=" << ratio << " sync=" << !no_sync << '\n'
             << bench_report_csv_header() << '\n';
    for (IngestBackend b : backends) {
        for (double p : parse_rates(pipelines_text)) {
            IngestBenchConfig cfg;
            cfg.backend = b;
            cfg.pipelines = static_cast<std::uint32_t>(p);
            cfg.work_dir = work_dir;
            cfg.trial_seconds = trial_seconds;
            cfg.store.sync_each_batch = !no_sync;
            cfg.replay.seed = seed;
            parse_ooo(ooo, cfg.replay);
            cfg.replay.ooo_ratio = cfg.replay.ooo == OooMode::none ? 0 : ratio;
            if (b == IngestBackend::sqlite && cfg.pipelines != 1) continue;
            const BenchReport r = bench_ingest(data, cfg);
            out.os() << bench_report_csv_row(r) << '\n';
            out.os().flush();
        }
    }
    return 0;
}

int cmd_bench_contention(const std::string& rates, int runs, int windows, int window_ms, const std::string& query,
                         const std::string& work_dir, bool no_sync, const std::string& out_path) {
    ContentionConfig cfg;
    cfg.rates = parse_rates(rates);
    cfg.runs = runs;
    cfg.windows = windows;
    cfg.window = std::chrono::milliseconds(window_ms);
    if (!query.empty()) cfg.query = query;
    cfg.work_dir = work_dir;
    cfg.store.sync_each_batch = !no_sync;
    Output out(out_path);
    out.os() << "# runs=" << runs << " windows=" << windows << " window_ms=" << window_ms << '\n'
             << contention_csv_header() << '\n';
    for (const auto& row : bench_contention(cfg)) out.os() << contention_csv_row(row) << '\n';
    return 0;
}

int cmd_gen(const std::string& dataset, std::size_t count, std::uint64_t seed, const std::string& out_path) {
    Output out(out_path);
    write_dataset_csv(out.os(), generate_dataset(dataset, count, seed));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LTSS: time-series store with UDP ingest and SQL queries"};
    app.require_subcommand(1);

    std::string path;
    std::string schema_arg;
    std::string out_path;
    std::uint64_t seed = seed_from_env();

    auto* create = app.add_subcommand("create", "Create a store from a schema config or builtin schema");
    std::uint64_t capacity = 0;
    std::uint32_t partitions = 0;
    bool no_sync = false;
    create->add_option("--schema", schema_arg, "Schema config file, or seismic|taxi|energy")->required();
    create->add_option("--path", path, "Store file")->required();
    create->add_option("--capacity", capacity, "Records per partition (default: schema capacity_records)");
    create->add_option("--partitions", partitions, "Partitions (default: schema pipelines)");
    create->add_flag("--no-sync", no_sync, "Skip fdatasync after each batch");

    auto* serve = app.add_subcommand("serve", "Run the UDP ingest daemon");
    std::string bind = "127.0.0.1";
    std::uint16_t port = 0;
    bool per_pipeline_ports = false;
    bool mpmc = false;
    std::size_t queue = 0;
    double duration = 0;
    double stats_every = 0;
    serve->add_option("--path", path, "Store file")->required();
    serve->add_option("--bind", bind, "IPv4 address to bind");
    serve->add_option("--port", port, "UDP port (0 = ephemeral)");
    serve->add_flag("--per-pipeline-ports", per_pipeline_ports, "One socket per pipeline on port, port+1, ...");
    serve->add_flag("--mpmc", mpmc, "MPMC queues (several receivers per socket)");
    serve->add_option("--queue", queue, "Queue slots per pipeline (power of two)");
    serve->add_option("--duration", duration, "Stop after this many seconds (0 = until signalled)");
    serve->add_option("--stats-every", stats_every, "Print counters every N seconds");

    auto* query = app.add_subcommand("query", "Run SQL (one-shot with -e, otherwise a shell on stdin)");
    std::vector<std::string> paths;
    std::string statement;
    std::size_t cache_bytes = 0;
    std::string combine = "auto";
    query->add_option("--path", paths, "Store file (repeat for several tables)")->required();
    query->add_option("-e,--execute", statement, "Statement to run");
    query->add_option("--cache-bytes", cache_bytes, "Prefetch cache budget");
    query->add_option("--combine", combine, "auto, append or sort-merge");
    query->add_option("--out", out_path, "Write CSV here instead of stdout");

    auto* rep = app.add_subcommand("replay", "Replay a dataset to a UDP endpoint");
    std::string csv;
    std::string gen;
    std::size_t count = 10'000;
    std::string host = "127.0.0.1";
    std::vector<std::uint16_t> ports;
    std::string rate = "max";
    bool restamp = false;
    std::string ooo = "none";
    std::uint32_t ratio = 0;
    std::uint32_t senders = 1;
    rep->add_option("--schema", schema_arg, "Schema for --csv (config file or builtin name)");
    rep->add_option("--csv", csv, "Dataset CSV");
    rep->add_option("--gen", gen, "Generate a synthetic dataset instead: seismic|taxi|energy");
    rep->add_option("--count", count, "Records to generate");
    rep->add_option("--host", host, "Target IPv4 address");
    rep->add_option("--port", ports, "Target port(s)")->required();
    rep->add_option("--rate", rate, "fidelity, max or records per second");
    rep->add_flag("--restamp", restamp, "Rewrite timestamps to the send time");
    rep->add_option("--ooo", ooo, "none, fixed:<ms> or random:<lo>-<hi>");
    rep->add_option("--ratio", ratio, "Delay one in K records");
    rep->add_option("--senders", senders, "Sender threads");
    rep->add_option("--seed", seed, "RNG seed (default: LTSS_SEED or 42)");

    auto* bi = app.add_subcommand("bench-ingest", "Search the highest zero-loss ingest rate");
    std::string dataset = "seismic";
    std::size_t records = 200'000;
    std::string pipelines_text = "1";
    std::string backend = "ltss";
    double trial_seconds = 2.0;
    std::string work_dir = "ltss-bench";
    bi->add_option("--dataset", dataset, "seismic|taxi|energy");
    bi->add_option("--records", records, "Records in the generated dataset");
    bi->add_option("--pipelines", pipelines_text, "Comma-separated pipeline counts");
    bi->add_option("--backend", backend, "ltss, sqlite or both");
    bi->add_option("--trial-seconds", trial_seconds, "Send budget per trial (0 = whole dataset)");
    bi->add_option("--ooo", ooo, "none, fixed:<ms> or random:<lo>-<hi>");
    bi->add_option("--ratio", ratio, "Delay one in K records");
    bi->add_flag("--no-sync", no_sync, "Skip fdatasync after each batch");
    bi->add_option("--work-dir", work_dir, "Scratch directory for trial stores");
    bi->add_option("--seed", seed, "RNG seed");
    bi->add_option("--out", out_path, "CSV output path");

    auto* bq = app.add_subcommand("bench-query", "Time the taxi or energy query suite");
    std::string suite = "taxi";
    std::size_t gen_count = 100'000;
    int reps = 5;
    bq->add_option("--suite", suite, "taxi or energy");
    bq->add_option("--path", paths, "Existing store(s); omitted = generate one");
    bq->add_option("--gen-count", gen_count, "Synthetic records when no --path is given");
    bq->add_option("--reps", reps, "Executions per query");
    bq->add_option("--seed", seed, "RNG seed");
    bq->add_option("--out", out_path, "CSV output path");

    auto* bc = app.add_subcommand("bench-contention", "Sliding-window query throughput under ingest");
    std::string rates = "0,50000,100000,200000";
    int runs = 40;
    int windows = 20;
    int window_ms = 50;
    std::string window_query;
    bc->add_option("--rates", rates, "Comma-separated ingest rates (records/s)");
    bc->add_option("--runs", runs, "Runs per rate");
    bc->add_option("--windows", windows, "Windows per run");
    bc->add_option("--window-ms", window_ms, "Window length");
    bc->add_option("--query", window_query, "Query text (default: 1000-record sliding average)");
    bc->add_flag("--no-sync", no_sync, "Skip fdatasync after each batch");
    bc->add_option("--work-dir", work_dir, "Scratch directory");
    bc->add_option("--out", out_path, "CSV output path");

    auto* info = app.add_subcommand("info", "Store and index statistics");
    info->add_option("--path", path, "Store file")->required();

    auto* rc = app.add_subcommand("recover-check", "Recover a store and verify order and index consistency");
    rc->add_option("--path", path, "Store file")->required();

    auto* load = app.add_subcommand("load", "Append a CSV or generated dataset directly to a store");
    load->add_option("--path", path, "Store file")->required();
    load->add_option("--csv", csv, "Dataset CSV (header names schema fields)");
    load->add_option("--gen", gen, "Generate instead: seismic|taxi|energy");
    load->add_option("--count", count, "Records to generate");
    load->add_option("--seed", seed, "RNG seed");

    auto* g = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
    g->add_option("--dataset", dataset, "seismic|taxi|energy");
    g->add_option("--count", count, "Records");
    g->add_option("--seed", seed, "RNG seed");
    g->add_option("--out", out_path, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*create) return cmd_create(schema_arg, path, capacity, partitions, no_sync);
        if (*serve) return cmd_serve(path, bind, port, per_pipeline_ports, queue, mpmc, duration, stats_every);
        if (*query) return cmd_query(paths, statement, cache_bytes, combine, out_path);
        if (*rep) {
            ReplaySpec spec;
            if (rate == "max") {
                spec.rate_mode = RateMode::max;
            } else if (rate == "fidelity") {
                spec.rate_mode = RateMode::fidelity;
            } else {
                spec.rate_mode = RateMode::fixed;
                spec.rate = std::stod(rate);
            }
            spec.restamp = restamp;
            parse_ooo(ooo, spec);
            spec.ooo_ratio = ratio;
            spec.seed = seed;
            spec.senders = senders;
            std::signal(SIGINT, on_signal);
            return cmd_replay(dataset_from_args(schema_arg, csv, gen, count, seed), spec, host, ports);
        }
        if (*bi) {
            return cmd_bench_ingest(dataset, records, pipelines_text, backend, trial_seconds, seed, ooo, ratio,
                                    no_sync, work_dir, out_path);
        }
        if (*bq) return cmd_bench_query(suite, paths, gen_count, reps, seed, out_path);
        if (*bc) return cmd_bench_contention(rates, runs, windows, window_ms, window_query, work_dir, no_sync, out_path);
        if (*info) return cmd_info(path);
        if (*rc) return cmd_recover_check(path);
        if (*load) return cmd_load(path, csv, gen, count, seed);
        if (*g) return cmd_gen(dataset, count, seed, out_path);
    } catch (const std::exception& e) {
        std::cerr << "ltss: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
