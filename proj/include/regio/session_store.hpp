#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "regio/advisor.hpp"
#include "regio/geo_grid.hpp"
#include "regio/metrics.hpp"
#include "regio/pipeline.hpp"

namespace regio {

enum class RunStatus { Queued, Running, Completed, Failed };

std::string_view to_string(RunStatus status);

struct RunError {
    std::string kind;
    std::string message;
    std::string stage;
    std::vector<std::string> fields;
};

struct RunRecord {
    std::string id;
    std::size_t revision = 0;
    RunStatus status = RunStatus::Queued;
    std::optional<RunError> error;
    std::vector<std::string> stages;            // completed stage names
    std::map<std::string, std::string> hashes;  // from the run manifest
    std::optional<PartitionMetrics> metrics;
    std::string created_at;
    std::string finished_at;
};

struct ConfigRevision {
    std::size_t index = 0;
    PipelineConfig config;
    nlohmann::json delta;  // null for full submissions
    std::string created_at;
};

struct SessionState {
    std::string id;
    std::string study_area;
    Place place;
    std::string hazard;
    std::string grid_hash;
    std::vector<ConfigRevision> revisions;
    std::vector<RunRecord> runs;
    std::string created_at;
    std::string updated_at;
};

nlohmann::json to_json(const RunRecord& run);
nlohmann::json to_json(const SessionState& session);

// File-backed session history: <data_dir>/sessions/<id>/session.json plus
// runs/<run id>/ with the pipeline's stage files. Runs execute on a worker
// thread per session, one at a time, in submission order.
class SessionStore {
public:
    SessionStore(std::filesystem::path data_dir, GridRaster grid, FeatureCatalog catalog, Gazetteer gazetteer);
    ~SessionStore();

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    const GridRaster& grid() const noexcept { return grid_; }
    const std::string& grid_hash() const noexcept { return grid_hash_; }
    const DatasetSummary& summary() const noexcept { return summary_; }

    std::string create_session(const std::string& study_area, const std::string& hazard);
    SessionState session(const std::string& id) const;
    std::vector<Suggestion> suggestions(const std::string& id) const;

    /// Appends a revision and returns its 0-based index.
    std::size_t submit_config(const std::string& id, const nlohmann::json& config);
    std::string start_run(const std::string& id, std::size_t revision);
    /// Applies `delta` to the latest revision, appends it and starts a run.
    std::pair<std::size_t, std::string> refine_session(const std::string& id, const nlohmann::json& delta);

    RunRecord run(const std::string& id, const std::string& run_id) const;
    /// Blocks until the run leaves the queued/running states.
    RunRecord wait_run(const std::string& id, const std::string& run_id) const;
    nlohmann::json stage(const std::string& id, const std::string& run_id, const std::string& stage) const;
    std::string regions_geojson(const std::string& id, const std::string& run_id) const;

private:
    struct Session {
        mutable std::mutex mutex;
        mutable std::condition_variable changed;
        SessionState state;
        std::deque<std::string> pending;
        bool worker_active = false;
    };

    std::shared_ptr<Session> find(const std::string& id) const;
    std::filesystem::path session_dir(const std::string& id) const;
    std::filesystem::path run_dir(const std::string& id, const std::string& run_id) const;
    void persist(const SessionState& state) const;
    void check_fresh(const SessionState& state) const;
    const RunRecord& find_run(const SessionState& state, const std::string& run_id) const;
    std::string enqueue_run(Session& session, std::size_t revision);
    void work(std::shared_ptr<Session> session);

    std::filesystem::path data_dir_;
    GridRaster grid_;
    std::string grid_hash_;
    DatasetSummary summary_;
    CatalogSuggestionProvider advisor_;
    Gazetteer gazetteer_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::vector<std::thread> workers_;
};

}  // namespace regio
