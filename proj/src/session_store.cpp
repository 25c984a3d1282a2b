#include "regio/session_store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "regio/error.hpp"
#include "regio/serialize.hpp"

namespace regio {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string random_id() {
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    const auto v = rng();
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[i] = kHex[(v >> (4 * i)) & 0xF];
    return out;
}

RunStatus status_from_string(const std::string& s) {
    if (s == "queued") return RunStatus::Queued;
    if (s == "running") return RunStatus::Running;
    if (s == "completed") return RunStatus::Completed;
    if (s == "failed") return RunStatus::Failed;
    fail(ErrorKind::Corruption, "unknown run status '" + s + "'");
}

Place place_from_json(const json& j) {
    Place p;
    p.name = j.at("name").get<std::string>();
    p.point = {j.at("lat").get<double>(), j.at("lon").get<double>()};
    const auto& b = j.at("bbox");
    p.bounds = {b.at("min_lat").get<double>(), b.at("min_lon").get<double>(), b.at("max_lat").get<double>(),
                b.at("max_lon").get<double>()};
    return p;
}

RunRecord run_from_json(const json& j) {
    RunRecord r;
    r.id = j.at("run_id").get<std::string>();
    r.revision = j.at("revision").get<std::size_t>();
    r.status = status_from_string(j.at("status").get<std::string>());
    if (j.contains("error") && !j["error"].is_null()) {
        const auto& e = j["error"];
        r.error = RunError{e.at("kind").get<std::string>(), e.at("message").get<std::string>(),
                           e.value("stage", ""), e.value("fields", std::vector<std::string>{})};
    }
    r.stages = j.value("stages", std::vector<std::string>{});
    r.hashes = j.value("hashes", std::map<std::string, std::string>{});
    if (j.contains("metrics") && !j["metrics"].is_null()) r.metrics = metrics_from_json(j["metrics"]);
    r.created_at = j.value("created_at", "");
    r.finished_at = j.value("finished_at", "");
    return r;
}

RunRecord& mutable_run(SessionState& state, const std::string& run_id) {
    for (auto& r : state.runs) {
        if (r.id == run_id) return r;
    }
    fail(ErrorKind::NotFound, "unknown run '" + run_id + "'");
}

SessionState session_from_json(const json& j) {
    SessionState s;
    s.id = j.at("session_id").get<std::string>();
    s.study_area = j.at("study_area").get<std::string>();
    s.place = place_from_json(j.at("place"));
    s.hazard = j.at("hazard").get<std::string>();
    s.grid_hash = j.at("grid_hash").get<std::string>();
    for (const auto& r : j.at("revisions")) {
        s.revisions.push_back({r.at("revision").get<std::size_t>(), config_from_json(r.at("config")),
                               r.value("delta", json(nullptr)), r.value("created_at", "")});
    }
    for (const auto& r : j.at("runs")) s.runs.push_back(run_from_json(r));
    s.created_at = j.value("created_at", "");
    s.updated_at = j.value("updated_at", "");
    return s;
}

}  // namespace

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Queued: return "queued";
        case RunStatus::Running: return "running";
        case RunStatus::Completed: return "completed";
        case RunStatus::Failed: return "failed";
    }
    return "failed";
}

json to_json(const RunRecord& r) {
    json j = {{"run_id", r.id},
              {"revision", r.revision},
              {"status", to_string(r.status)},
              {"stages", r.stages},
              {"hashes", r.hashes},
              {"metrics", r.metrics ? to_json(*r.metrics) : json(nullptr)},
              {"created_at", r.created_at},
              {"finished_at", r.finished_at}};
    if (r.error) {
        j["error"] = {{"kind", r.error->kind},
                      {"message", r.error->message},
                      {"stage", r.error->stage},
                      {"fields", r.error->fields}};
    } else {
        j["error"] = nullptr;
    }
    return j;
}

json to_json(const SessionState& s) {
    json revisions = json::array();
    for (const auto& r : s.revisions) {
        revisions.push_back(
            {{"revision", r.index}, {"config", to_json(r.config)}, {"delta", r.delta}, {"created_at", r.created_at}});
    }
    json runs = json::array();
    for (const auto& r : s.runs) runs.push_back(to_json(r));
    return {{"session_id", s.id},
            {"study_area", s.study_area},
            {"place", to_json(s.place)},
            {"hazard", s.hazard},
            {"grid_hash", s.grid_hash},
            {"revisions", revisions},
            {"runs", runs},
            {"created_at", s.created_at},
            {"updated_at", s.updated_at}};
}

SessionStore::SessionStore(fs::path data_dir, GridRaster grid, FeatureCatalog catalog, Gazetteer gazetteer)
    : data_dir_(std::move(data_dir)),
      grid_(std::move(grid)),
      grid_hash_(sha256_hex(write_grid_csv(grid_))),
      summary_(summarize_dataset(grid_)),
      advisor_(std::move(catalog)),
      gazetteer_(std::move(gazetteer)) {
    const auto root = data_dir_ / "sessions";
    fs::create_directories(root);
    for (const auto& entry : fs::directory_iterator(root)) {
        const auto file = entry.path() / "session.json";
        if (!entry.is_directory() || !fs::exists(file)) continue;
        std::ifstream in(file);
        SessionState state;
        try {
            state = session_from_json(json::parse(in));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::Corruption, "unreadable session " + file.string() + ": " + e.what());
        }
        bool interrupted = false;
        for (auto& run : state.runs) {
            if (run.status == RunStatus::Queued || run.status == RunStatus::Running) {
                run.status = RunStatus::Failed;
                run.error = RunError{"contract", "interrupted by service restart", "", {}};
                interrupted = true;
            }
        }
        if (interrupted) persist(state);
        auto session = std::make_shared<Session>();
        session->state = std::move(state);
        sessions_.emplace(session->state.id, std::move(session));
    }
}

SessionStore::~SessionStore() {
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(sessions_mutex_);
        workers.swap(workers_);
    }
    for (auto& t : workers) {
        if (t.joinable()) t.join();
    }
}

fs::path SessionStore::session_dir(const std::string& id) const { return data_dir_ / "sessions" / id; }

fs::path SessionStore::run_dir(const std::string& id, const std::string& run_id) const {
    return session_dir(id) / "runs" / run_id;
}

void SessionStore::persist(const SessionState& state) const {
    const auto dir = session_dir(state.id);
    fs::create_directories(dir);
    const auto tmp = dir / "session.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << to_json(state).dump(2) << "\n";
        if (!out) fail(ErrorKind::Contract, "cannot write " + tmp.string());
    }
    fs::rename(tmp, dir / "session.json");
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "unknown session '" + id + "'");
    return it->second;
}

void SessionStore::check_fresh(const SessionState& state) const {
    if (state.grid_hash != grid_hash_) {
        fail(ErrorKind::Conflict, "session '" + state.id + "' was created against different grid data");
    }
}

const RunRecord& SessionStore::find_run(const SessionState& state, const std::string& run_id) const {
    for (const auto& r : state.runs) {
        if (r.id == run_id) return r;
    }
    throw Error(ErrorKind::NotFound, "unknown run '" + run_id + "' in session '" + state.id + "'");
}

std::string SessionStore::create_session(const std::string& study_area, const std::string& hazard) {
    if (hazard.empty()) throw Error(ErrorKind::Validation, "hazard must be nonempty").with_fields({"hazard"});
    if (study_area.empty()) {
        throw Error(ErrorKind::Validation, "study_area must be nonempty").with_fields({"study_area"});
    }
    const Place& place = gazetteer_.geocode(study_area);
    auto session = std::make_shared<Session>();
    auto& s = session->state;
    s.study_area = study_area;
    s.place = place;
    s.hazard = hazard;
    s.grid_hash = grid_hash_;
    s.created_at = s.updated_at = utc_now();

    std::lock_guard lock(sessions_mutex_);
    do {
        s.id = random_id();
    } while (sessions_.count(s.id) || fs::exists(session_dir(s.id)));
    persist(s);
    sessions_.emplace(s.id, session);
    return s.id;
}

SessionState SessionStore::session(const std::string& id) const {
    auto session = find(id);
    std::lock_guard lock(session->mutex);
    check_fresh(session->state);
    return session->state;
}

std::vector<Suggestion> SessionStore::suggestions(const std::string& id) const {
    const auto state = session(id);
    return advisor_.suggest(state.hazard, grid_.feature_names());
}

std::size_t SessionStore::submit_config(const std::string& id, const json& config_json) {
    auto session = find(id);
    auto config = config_from_json(config_json);
    validate_config(config, grid_);
    check_feasible(config, grid_);
    std::lock_guard lock(session->mutex);
    auto& s = session->state;
    check_fresh(s);
    const auto index = s.revisions.size();
    s.revisions.push_back({index, std::move(config), nullptr, utc_now()});
    s.updated_at = s.revisions.back().created_at;
    persist(s);
    return index;
}

std::string SessionStore::enqueue_run(Session& session, std::size_t revision) {
    auto& s = session.state;
    if (revision >= s.revisions.size()) {
        throw Error(ErrorKind::NotFound, "revision " + std::to_string(revision) + " does not exist");
    }
    RunRecord run;
    run.id = "run-" + std::to_string(s.runs.size());
    run.revision = revision;
    run.created_at = utc_now();
    s.runs.push_back(run);
    s.updated_at = run.created_at;
    persist(s);
    session.pending.push_back(run.id);
    return run.id;
}

std::string SessionStore::start_run(const std::string& id, std::size_t revision) {
    auto session = find(id);
    std::string run_id;
    bool spawn = false;
    {
        std::lock_guard lock(session->mutex);
        check_fresh(session->state);
        run_id = enqueue_run(*session, revision);
        spawn = !session->worker_active;
        session->worker_active = true;
    }
    if (spawn) {
        std::lock_guard lock(sessions_mutex_);
        workers_.emplace_back(&SessionStore::work, this, session);
    }
    return run_id;
}

std::pair<std::size_t, std::string> SessionStore::refine_session(const std::string& id, const json& delta) {
    auto session = find(id);
    std::size_t index = 0;
    std::string run_id;
    bool spawn = false;
    {
        std::lock_guard lock(session->mutex);
        auto& s = session->state;
        check_fresh(s);
        if (s.revisions.empty()) fail(ErrorKind::Contract, "refine requires a prior config revision");
        auto config = apply_config_delta(s.revisions.back().config, delta);
        validate_config(config, grid_);
        check_feasible(config, grid_);
        index = s.revisions.size();
        s.revisions.push_back({index, std::move(config), delta, utc_now()});
        run_id = enqueue_run(*session, index);
        spawn = !session->worker_active;
        session->worker_active = true;
    }
    if (spawn) {
        std::lock_guard lock(sessions_mutex_);
        workers_.emplace_back(&SessionStore::work, this, session);
    }
    return {index, run_id};
}

void SessionStore::work(std::shared_ptr<Session> session) {
    for (;;) {
        std::string run_id;
        PipelineConfig config;
        {
            std::lock_guard lock(session->mutex);
            if (session->pending.empty()) {
                session->worker_active = false;
                return;
            }
            run_id = session->pending.front();
            session->pending.pop_front();
            auto& run = mutable_run(session->state, run_id);
            run.status = RunStatus::Running;
            config = session->state.revisions.at(run.revision).config;
            persist(session->state);
        }
        session->changed.notify_all();

        const auto dir = run_dir(session->state.id, run_id);
        std::optional<RunArtifacts> artifacts;
        std::optional<RunError> error;
        try {
            artifacts = run_pipeline(grid_, config, dir);
        } catch (const Error& e) {
            error = RunError{std::string(to_string(e.kind())), e.what(), e.stage(), e.fields()};
        } catch (const std::exception& e) {
            error = RunError{"contract", e.what(), "", {}};
        }

        {
            std::lock_guard lock(session->mutex);
            auto& run = mutable_run(session->state, run_id);
            run.finished_at = utc_now();
            if (artifacts) {
                run.status = RunStatus::Completed;
                run.stages = artifacts->completed;
                run.hashes = artifacts->hashes;
                run.metrics = artifacts->metrics;
            } else {
                run.status = RunStatus::Failed;
                run.error = std::move(error);
                if (fs::exists(dir / "manifest.json")) run.hashes = load_manifest(dir);
                for (auto stage : kStageNames) {
                    if (fs::exists(dir / (std::string(stage) + ".json"))) run.stages.emplace_back(stage);
                }
            }
            session->state.updated_at = run.finished_at;
            persist(session->state);
        }
        session->changed.notify_all();
    }
}

RunRecord SessionStore::run(const std::string& id, const std::string& run_id) const {
    auto session = find(id);
    std::lock_guard lock(session->mutex);
    check_fresh(session->state);
    return find_run(session->state, run_id);
}

RunRecord SessionStore::wait_run(const std::string& id, const std::string& run_id) const {
    auto session = find(id);
    std::unique_lock lock(session->mutex);
    check_fresh(session->state);
    find_run(session->state, run_id);
    session->changed.wait(lock, [&] {
        const auto status = find_run(session->state, run_id).status;
        return status == RunStatus::Completed || status == RunStatus::Failed;
    });
    return find_run(session->state, run_id);
}

json SessionStore::stage(const std::string& id, const std::string& run_id, const std::string& stage) const {
    const auto record = run(id, run_id);
    if (std::find(record.stages.begin(), record.stages.end(), stage) == record.stages.end()) {
        throw Error(ErrorKind::NotFound, "stage '" + stage + "' is not available for " + run_id);
    }
    return load_stage(run_dir(id, run_id), stage);
}

std::string SessionStore::regions_geojson(const std::string& id, const std::string& run_id) const {
    const auto record = run(id, run_id);
    if (record.status != RunStatus::Completed) {
        throw Error(ErrorKind::NotFound, run_id + " has no regions yet (status " +
                                             std::string(to_string(record.status)) + ")");
    }
    const auto path = run_dir(id, run_id) / "regions.geojson";
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::NotFound, "missing " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto bytes = ss.str();
    const auto it = record.hashes.find("regions.geojson");
    if (it != record.hashes.end() && sha256_hex(bytes) != it->second) {
        fail(ErrorKind::Corruption, "regions.geojson hash mismatch for " + run_id);
    }
    return bytes;
}

}  // namespace regio
