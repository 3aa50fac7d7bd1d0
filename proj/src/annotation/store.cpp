#include "ragprobe/annotation/store.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/metrics/resampling.hpp"
#include "sqlite.hpp"

namespace ragprobe::annotation {
namespace {

using sql::Database;
using sql::Transaction;

const char* const kMigrations[] = {
    R"SQL(
CREATE TABLE annotators (
    annotator_id TEXT PRIMARY KEY,
    display_name TEXT NOT NULL,
    stages TEXT NOT NULL,
    adjudicator INTEGER NOT NULL DEFAULT 0,
    token_hash TEXT NOT NULL UNIQUE
);
CREATE TABLE tasks (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    task_id TEXT NOT NULL UNIQUE,
    stage TEXT NOT NULL,
    payload TEXT NOT NULL,
    status TEXT NOT NULL DEFAULT 'open',
    required_annotations INTEGER NOT NULL CHECK (required_annotations IN (1, 2)),
    item_count INTEGER NOT NULL
);
CREATE INDEX tasks_stage_status ON tasks(stage, status, seq);
CREATE TABLE claims (
    task_id TEXT NOT NULL REFERENCES tasks(task_id),
    annotator_id TEXT NOT NULL,
    role TEXT NOT NULL,
    claimed_at INTEGER NOT NULL,
    state TEXT NOT NULL,
    PRIMARY KEY (task_id, annotator_id)
);
CREATE TABLE submissions (
    submission_id INTEGER PRIMARY KEY AUTOINCREMENT,
    task_id TEXT NOT NULL REFERENCES tasks(task_id),
    annotator_id TEXT NOT NULL,
    role TEXT NOT NULL,
    labels TEXT NOT NULL,
    submitted_at INTEGER NOT NULL,
    UNIQUE (task_id, annotator_id)
);
CREATE TRIGGER submissions_no_update BEFORE UPDATE ON submissions
BEGIN SELECT RAISE(ABORT, 'submissions are append-only'); END;
CREATE TRIGGER submissions_no_delete BEFORE DELETE ON submissions
BEGIN SELECT RAISE(ABORT, 'submissions are append-only'); END;
)SQL",
};

std::string token_hash(std::string_view token) { return sha256_hex(token); }

std::string stages_text(const std::set<Stage>& stages)
{
    Json arr = Json::array();
    for (Stage s : stages) arr.push_back(metrics::to_string(s));
    return arr.dump();
}

AnnotatorProfile read_profile(sql::Statement& st)
{
    AnnotatorProfile p;
    p.annotator_id = st.text(0);
    p.display_name = st.text(1);
    for (const auto& s : Json::parse(st.text(2))) p.stages.insert(metrics::parse_stage(s.get<std::string>()));
    p.adjudicator = st.integer(3) != 0;
    return p;
}

std::optional<AnnotatorProfile> load_profile(Database& db, const std::string& annotator_id)
{
    auto st = db.prepare("SELECT annotator_id, display_name, stages, adjudicator FROM annotators WHERE annotator_id = ?");
    st.bind(1, annotator_id);
    if (!st.step()) return std::nullopt;
    return read_profile(st);
}

constexpr const char* kTaskColumns = "task_id, stage, payload, status, required_annotations, item_count";

AnnotationTask read_task(Database& db, sql::Statement& st)
{
    AnnotationTask t;
    t.task_id = st.text(0);
    t.stage = metrics::parse_stage(st.text(1));
    t.payload = Json::parse(st.text(2));
    t.status = parse_task_status(st.text(3));
    t.required_annotations = static_cast<int>(st.integer(4));
    t.item_count = static_cast<std::size_t>(st.integer(5));
    auto claims = db.prepare(
        "SELECT annotator_id, claimed_at, state FROM claims WHERE task_id = ? ORDER BY claimed_at, annotator_id");
    claims.bind(1, t.task_id);
    while (claims.step())
        t.claims.push_back({claims.text(0), claims.integer(1), parse_claim_state(claims.text(2))});
    return t;
}

std::optional<AnnotationTask> load_task(Database& db, const std::string& task_id)
{
    auto st = db.prepare(std::string("SELECT ") + kTaskColumns + " FROM tasks WHERE task_id = ?");
    st.bind(1, task_id);
    if (!st.step()) return std::nullopt;
    return read_task(db, st);
}

void set_status(Database& db, const std::string& task_id, TaskStatus status)
{
    db.prepare("UPDATE tasks SET status = ? WHERE task_id = ?").bind(1, to_string(status)).bind(2, task_id).run();
}

std::int64_t expire_in(Database& db, std::int64_t now, std::int64_t lease)
{
    auto st = db.prepare("UPDATE claims SET state = 'expired' WHERE state = 'active' AND claimed_at + ? <= ?");
    st.bind(1, lease).bind(2, now).run();
    const std::int64_t expired = db.changes();
    if (expired > 0) {
        db.exec(R"SQL(
UPDATE tasks SET status = 'open'
WHERE status = 'claimed'
  AND (SELECT COUNT(*) FROM claims c
       WHERE c.task_id = tasks.task_id AND c.role = 'annotator' AND c.state IN ('active', 'submitted'))
      < required_annotations)SQL");
    }
    return expired;
}

std::int64_t live_annotator_claims(Database& db, const std::string& task_id)
{
    auto st = db.prepare(
        "SELECT COUNT(*) FROM claims WHERE task_id = ? AND role = 'annotator' AND state IN ('active', 'submitted')");
    st.bind(1, task_id);
    st.step();
    return st.integer(0);
}

std::vector<Json> parse_records(const std::string& text) { return Json::parse(text).get<std::vector<Json>>(); }

} // namespace

AnnotationStore::AnnotationStore(std::filesystem::path path, StoreOptions options)
    : path_(std::move(path)), options_(std::move(options))
{
    if (options_.lease.count() <= 0) throw ConfigError("annotation lease must be positive");
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    Database db(path_);
    Transaction tx(db);
    db.exec("CREATE TABLE IF NOT EXISTS schema_version (version INTEGER NOT NULL)");
    auto st = db.prepare("SELECT MAX(version) FROM schema_version");
    st.step();
    const std::int64_t current = st.is_null(0) ? 0 : st.integer(0);
    constexpr auto known = static_cast<std::int64_t>(std::size(kMigrations));
    if (current > known)
        throw SchemaError("annotation store " + path_.string() + " has schema version " + std::to_string(current) +
                          ", newer than this build supports (" + std::to_string(known) + ")");
    for (std::int64_t v = current; v < known; ++v) {
        db.exec(kMigrations[v]);
        db.prepare("INSERT INTO schema_version (version) VALUES (?)").bind(1, v + 1).run();
    }
    tx.commit();
}

std::int64_t AnnotationStore::now() const
{
    if (options_.clock) return options_.clock();
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

int AnnotationStore::schema_version() const
{
    Database db(path_);
    auto st = db.prepare("SELECT MAX(version) FROM schema_version");
    st.step();
    return static_cast<int>(st.integer(0));
}

void AnnotationStore::register_annotator(const AnnotatorProfile& profile, std::string_view token)
{
    if (profile.annotator_id.empty()) throw InvalidArgument("annotator id must be non-empty");
    if (token.size() < 8) throw InvalidArgument("annotator token must be at least 8 characters");
    Database db(path_);
    Transaction tx(db);
    db.prepare(R"SQL(
INSERT INTO annotators (annotator_id, display_name, stages, adjudicator, token_hash) VALUES (?, ?, ?, ?, ?)
ON CONFLICT(annotator_id) DO UPDATE SET display_name = excluded.display_name, stages = excluded.stages,
    adjudicator = excluded.adjudicator, token_hash = excluded.token_hash)SQL")
        .bind(1, profile.annotator_id)
        .bind(2, profile.display_name.empty() ? profile.annotator_id : profile.display_name)
        .bind(3, stages_text(profile.stages))
        .bind(4, std::int64_t{profile.adjudicator ? 1 : 0})
        .bind(5, token_hash(token))
        .run();
    tx.commit();
}

std::optional<AnnotatorProfile> AnnotationStore::authenticate(std::string_view token) const
{
    Database db(path_);
    auto st = db.prepare("SELECT annotator_id, display_name, stages, adjudicator FROM annotators WHERE token_hash = ?");
    st.bind(1, token_hash(token));
    if (!st.step()) return std::nullopt;
    return read_profile(st);
}

std::optional<AnnotatorProfile> AnnotationStore::annotator(const std::string& annotator_id) const
{
    Database db(path_);
    return load_profile(db, annotator_id);
}

std::map<Stage, std::size_t> AnnotationStore::create_tasks(const TaskSource& source,
                                                           const TaskCreationOptions& options)
{
    const double f = options.double_annotation_fraction;
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("double-annotation fraction must lie in [0, 1]");
    const std::vector<TaskSpec> specs = build_task_specs(source);

    Database db(path_);
    Transaction tx(db);
    std::map<Stage, std::vector<const TaskSpec*>> fresh;
    for (const auto& spec : specs) {
        auto st = db.prepare("SELECT 1 FROM tasks WHERE task_id = ?");
        st.bind(1, spec.task_id);
        if (!st.step()) fresh[spec.stage].push_back(&spec);
    }
    std::map<Stage, std::size_t> created;
    for (auto& [stage, list] : fresh) {
        const std::size_t n = list.size();
        const auto doubles = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        metrics::ReplicateStream stream(options.seed, static_cast<std::uint64_t>(stage));
        for (std::size_t i = 0; i < doubles; ++i) std::swap(order[i], order[i + stream.index(n - i)]);
        std::vector<bool> is_double(n, false);
        for (std::size_t i = 0; i < doubles; ++i) is_double[order[i]] = true;

        for (std::size_t i = 0; i < n; ++i) {
            const TaskSpec& spec = *list[i];
            db.prepare("INSERT INTO tasks (task_id, stage, payload, required_annotations, item_count) "
                       "VALUES (?, ?, ?, ?, ?)")
                .bind(1, spec.task_id)
                .bind(2, metrics::to_string(spec.stage))
                .bind(3, spec.payload.dump())
                .bind(4, std::int64_t{is_double[i] ? 2 : 1})
                .bind(5, static_cast<std::int64_t>(spec.item_count))
                .run();
        }
        created[stage] = n;
    }
    tx.commit();
    return created;
}

std::optional<AnnotationTask> AnnotationStore::claim_next(const std::string& annotator_id, Stage stage)
{
    Database db(path_);
    Transaction tx(db);
    const auto profile = load_profile(db, annotator_id);
    if (!profile) throw PermissionError("unknown annotator '" + annotator_id + "'");
    if (!profile->stages.contains(stage))
        throw PermissionError("annotator '" + annotator_id + "' may not label the " +
                              std::string(metrics::to_string(stage)) + " stage");
    const std::int64_t t = now();
    expire_in(db, t, options_.lease.count());

    std::optional<std::string> task_id;
    std::string role = "annotator";
    if (profile->adjudicator) {
        auto st = db.prepare(R"SQL(
SELECT task_id FROM tasks
WHERE stage = ? AND status = 'adjudication'
  AND NOT EXISTS (SELECT 1 FROM claims c WHERE c.task_id = tasks.task_id
                  AND (c.annotator_id = ? OR (c.role = 'adjudicator' AND c.state IN ('active', 'submitted'))))
ORDER BY seq LIMIT 1)SQL");
        st.bind(1, metrics::to_string(stage)).bind(2, annotator_id);
        if (st.step()) {
            task_id = st.text(0);
            role = "adjudicator";
        }
    }
    if (!task_id) {
        auto st = db.prepare(R"SQL(
SELECT task_id FROM tasks
WHERE stage = ? AND status = 'open'
  AND NOT EXISTS (SELECT 1 FROM claims c WHERE c.task_id = tasks.task_id AND c.annotator_id = ?)
ORDER BY seq LIMIT 1)SQL");
        st.bind(1, metrics::to_string(stage)).bind(2, annotator_id);
        if (st.step()) task_id = st.text(0);
    }
    if (!task_id) {
        tx.commit();
        return std::nullopt;
    }
    db.prepare("INSERT INTO claims (task_id, annotator_id, role, claimed_at, state) VALUES (?, ?, ?, ?, 'active')")
        .bind(1, *task_id)
        .bind(2, annotator_id)
        .bind(3, role)
        .bind(4, t)
        .run();
    if (role == "annotator") {
        auto task = load_task(db, *task_id);
        if (live_annotator_claims(db, *task_id) >= task->required_annotations)
            set_status(db, *task_id, TaskStatus::claimed);
    }
    auto task = load_task(db, *task_id);
    tx.commit();
    return task;
}

SubmissionReceipt AnnotationStore::submit_labels(const std::string& task_id, const std::string& annotator_id,
                                                 const Json& labels)
{
    Database db(path_);
    Transaction tx(db);
    const std::int64_t t = now();
    expire_in(db, t, options_.lease.count());
    auto task = load_task(db, task_id);
    if (!task) throw NotFound("unknown task '" + task_id + "'");
    {
        auto st = db.prepare("SELECT 1 FROM submissions WHERE task_id = ? AND annotator_id = ?");
        st.bind(1, task_id).bind(2, annotator_id);
        if (st.step())
            throw ConflictError("annotator '" + annotator_id + "' already submitted labels for task '" + task_id + "'");
    }
    auto claim = db.prepare("SELECT role, state FROM claims WHERE task_id = ? AND annotator_id = ?");
    claim.bind(1, task_id).bind(2, annotator_id);
    if (!claim.step()) throw PermissionError("task '" + task_id + "' is not claimed by annotator '" + annotator_id + "'");
    const std::string role_text = claim.text(0);
    if (parse_claim_state(claim.text(1)) == ClaimState::expired)
        throw ConflictError("claim of annotator '" + annotator_id + "' on task '" + task_id + "' has expired");
    const metrics::AnnotatorRole role = metrics::parse_role(role_text);

    const std::vector<Json> records = convert_submission(*task, labels, {annotator_id, role, task_id});
    db.prepare("INSERT INTO submissions (task_id, annotator_id, role, labels, submitted_at) VALUES (?, ?, ?, ?, ?)")
        .bind(1, task_id)
        .bind(2, annotator_id)
        .bind(3, role_text)
        .bind(4, Json(records).dump())
        .bind(5, t)
        .run();
    db.prepare("UPDATE claims SET state = 'submitted' WHERE task_id = ? AND annotator_id = ?")
        .bind(1, task_id)
        .bind(2, annotator_id)
        .run();

    SubmissionReceipt receipt{task_id, annotator_id, role, records.size(), task->status, false};
    if (role == metrics::AnnotatorRole::adjudicator) {
        receipt.task_status = TaskStatus::submitted;
    } else {
        auto st = db.prepare("SELECT labels FROM submissions WHERE task_id = ? AND role = 'annotator' ORDER BY annotator_id");
        st.bind(1, task_id);
        std::vector<std::vector<Json>> submitted;
        while (st.step()) submitted.push_back(parse_records(st.text(0)));
        if (static_cast<int>(submitted.size()) >= task->required_annotations) {
            receipt.task_status = TaskStatus::submitted;
            if (submitted.size() >= 2) {
                receipt.agreement_pair_complete = true;
                const auto first = label_values(task->stage, submitted[0]);
                for (std::size_t i = 1; i < submitted.size(); ++i)
                    if (label_values(task->stage, submitted[i]) != first) receipt.task_status = TaskStatus::adjudication;
            }
        }
    }
    set_status(db, task_id, receipt.task_status);
    tx.commit();
    return receipt;
}

AnnotationTask AnnotationStore::task(const std::string& task_id) const
{
    Database db(path_);
    auto task = load_task(db, task_id);
    if (!task) throw NotFound("unknown task '" + task_id + "'");
    return *task;
}

std::vector<AnnotationTask> AnnotationStore::tasks(std::optional<Stage> stage) const
{
    Database db(path_);
    auto st = db.prepare(std::string("SELECT ") + kTaskColumns +
                         " FROM tasks WHERE (?1 IS NULL OR stage = ?1) ORDER BY seq");
    if (stage)
        st.bind(1, metrics::to_string(*stage));
    else
        st.bind_null(1);
    std::vector<AnnotationTask> out;
    while (st.step()) out.push_back(read_task(db, st));
    return out;
}

std::size_t AnnotationStore::expire_leases()
{
    Database db(path_);
    Transaction tx(db);
    const auto n = expire_in(db, now(), options_.lease.count());
    tx.commit();
    return static_cast<std::size_t>(n);
}

std::string AnnotationStore::export_labels(std::optional<Stage> stage) const
{
    Database db(path_);
    // One read transaction so the export sees a single snapshot.
    db.exec("BEGIN");
    auto st = db.prepare(R"SQL(
SELECT s.labels FROM submissions s JOIN tasks t ON t.task_id = s.task_id
WHERE (?1 IS NULL OR t.stage = ?1)
ORDER BY s.task_id, s.annotator_id)SQL");
    if (stage)
        st.bind(1, metrics::to_string(*stage));
    else
        st.bind_null(1);
    std::string out = metrics::header_record(stage).dump() + "\n";
    while (st.step())
        for (const auto& record : parse_records(st.text(0))) out += record.dump() + "\n";
    db.exec("COMMIT");
    return out;
}

Json AnnotationStore::progress() const
{
    Database db(path_);
    Json stages = Json::object();
    for (Stage s : {Stage::relevance, Stage::selection, Stage::factuality, Stage::completeness}) {
        Json counts{{"open", 0}, {"claimed", 0}, {"submitted", 0}, {"adjudication", 0}, {"total", 0}};
        auto st = db.prepare("SELECT status, COUNT(*) FROM tasks WHERE stage = ? GROUP BY status");
        st.bind(1, metrics::to_string(s));
        std::int64_t total = 0;
        while (st.step()) {
            counts[st.text(0)] = st.integer(1);
            total += st.integer(1);
        }
        counts["total"] = total;
        stages[std::string(metrics::to_string(s))] = counts;
    }
    Json per_annotator = Json::object();
    auto st = db.prepare("SELECT annotator_id, COUNT(*) FROM submissions GROUP BY annotator_id ORDER BY annotator_id");
    std::int64_t submissions = 0;
    while (st.step()) {
        per_annotator[st.text(0)] = st.integer(1);
        submissions += st.integer(1);
    }
    return Json{{"stages", stages}, {"submissions", submissions}, {"per_annotator", per_annotator}};
}

metrics::AgreementResult AnnotationStore::agreement(Stage stage, bool merge_partial) const
{
    metrics::LabelSet labels;
    const std::string text = export_labels(stage);
    std::size_t begin = 0;
    while (begin < text.size()) {
        const auto end = text.find('\n', begin);
        metrics::add_label_record(Json::parse(text.substr(begin, end - begin)), labels);
        begin = end + 1;
    }
    return metrics::krippendorff_alpha(metrics::agreement_units(labels, stage, merge_partial));
}

std::size_t AnnotationStore::submission_count() const
{
    Database db(path_);
    auto st = db.prepare("SELECT COUNT(*) FROM submissions");
    st.step();
    return static_cast<std::size_t>(st.integer(0));
}

} // namespace ragprobe::annotation
