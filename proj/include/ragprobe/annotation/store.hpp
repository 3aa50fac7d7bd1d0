#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "ragprobe/annotation/types.hpp"
#include "ragprobe/metrics/agreement.hpp"

namespace ragprobe::annotation {

inline constexpr int kStoreSchemaVersion = 1;

struct StoreOptions {
    std::chrono::seconds lease{std::chrono::hours(24)};
    /// Unix seconds; defaults to the system clock.
    std::function<std::int64_t()> clock;
};

struct TaskCreationOptions {
    double double_annotation_fraction = 0.1;
    std::uint64_t seed = 20240611;
};

/// Annotation tasks, claims and submissions in one SQLite file. Every call
/// opens its own connection, so a store may be shared between threads and
/// processes; claims and submissions run inside BEGIN IMMEDIATE transactions.
/// Submissions are append-only, enforced by triggers in the database itself.
class AnnotationStore {
public:
    explicit AnnotationStore(std::filesystem::path path, StoreOptions options = {});

    int schema_version() const;
    const std::filesystem::path& path() const { return path_; }

    /// Adds or replaces a profile; `token` is stored hashed.
    void register_annotator(const AnnotatorProfile& profile, std::string_view token);
    std::optional<AnnotatorProfile> authenticate(std::string_view token) const;
    std::optional<AnnotatorProfile> annotator(const std::string& annotator_id) const;

    /// Inserts the tasks of `source` that do not exist yet. Within each stage,
    /// round(fraction * new tasks) of them, drawn with the seed, need two
    /// annotations. Returns the number of new tasks per stage.
    std::map<Stage, std::size_t> create_tasks(const TaskSource& source, const TaskCreationOptions& options = {});

    /// Oldest eligible task for the annotator, or nullopt when there is none.
    /// Adjudicators are offered disputed tasks first. Throws PermissionError
    /// when the annotator may not label `stage`.
    std::optional<AnnotationTask> claim_next(const std::string& annotator_id, Stage stage);

    /// Throws NotFound (unknown task), PermissionError (not claimed by the
    /// annotator), ConflictError (resubmission, expired claim) or
    /// InvalidArgument (labels do not match the task's items).
    SubmissionReceipt submit_labels(const std::string& task_id, const std::string& annotator_id, const Json& labels);

    AnnotationTask task(const std::string& task_id) const;
    std::vector<AnnotationTask> tasks(std::optional<Stage> stage = std::nullopt) const;

    /// Returns expired claims to the pool; also done implicitly by claims and submissions.
    std::size_t expire_leases();

    /// Header record, then every submitted label ordered by (task_id, annotator_id).
    std::string export_labels(std::optional<Stage> stage = std::nullopt) const;

    Json progress() const;

    /// Nominal alpha over the doubly annotated tasks submitted so far.
    metrics::AgreementResult agreement(Stage stage, bool merge_partial = true) const;

    std::size_t submission_count() const;

private:
    std::int64_t now() const;

    std::filesystem::path path_;
    StoreOptions options_;
};

} // namespace ragprobe::annotation
