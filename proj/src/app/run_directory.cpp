#include "ragprobe/app/run_directory.hpp"

#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"

namespace ragprobe::app {
namespace {

Json snapshot_body(const ExperimentConfig& config, const Json& inputs)
{
    return Json{{"snapshot_version", kSnapshotVersion}, {"config", to_json(config)}, {"inputs", inputs}};
}

} // namespace

RunDirectory RunDirectory::create(const std::filesystem::path& dir, const ExperimentConfig& config, const Json& inputs)
{
    std::filesystem::create_directories(dir);
    const auto root = std::filesystem::weakly_canonical(dir);
    ExperimentConfig portable = config;
    for (auto& c : portable.corpora)
        c.path = std::filesystem::relative(std::filesystem::weakly_canonical(config.corpus_path(c)), root)
                     .generic_string();
    portable.base_dir = root;

    const Json body = snapshot_body(portable, inputs);
    const std::string digest = sha256_hex(body.dump());
    RunDirectory rd;
    rd.path_ = dir;
    if (std::filesystem::exists(rd.snapshot_file())) {
        const RunDirectory existing = open(dir);
        if (existing.digest() != digest)
            throw ConflictError("run directory " + dir.string() +
                                " already holds a different experiment (snapshot " + existing.digest().substr(0, 12) +
                                "); use a new directory");
        return existing;
    }
    Json file = body;
    file["digest"] = digest;
    write_file_atomic(rd.snapshot_file(), file.dump(2) + "\n");
    rd.digest_ = digest;
    rd.config_ = std::move(portable);
    rd.inputs_ = inputs;
    return rd;
}

RunDirectory RunDirectory::open(const std::filesystem::path& dir)
{
    RunDirectory rd;
    rd.path_ = dir;
    if (!std::filesystem::exists(rd.snapshot_file()))
        throw NotFound("no config.snapshot.json in " + dir.string() + "; is this a run directory?");
    Json file = Json::parse(read_file(rd.snapshot_file()), nullptr, false);
    if (file.is_discarded() || !file.is_object()) throw SchemaError(rd.snapshot_file().string() + " is not valid JSON");
    if (file.value("snapshot_version", 0) != kSnapshotVersion)
        throw SchemaError(rd.snapshot_file().string() + ": unsupported snapshot version");
    rd.config_ = parse_experiment_config(file.at("config"), std::filesystem::weakly_canonical(dir));
    rd.inputs_ = file.value("inputs", Json::object());
    rd.digest_ = sha256_hex(snapshot_body(rd.config_, rd.inputs_).dump());
    if (file.value("digest", std::string()) != rd.digest_)
        throw ConflictError(rd.snapshot_file().string() + " was modified after it was written (digest mismatch)");
    return rd;
}

} // namespace ragprobe::app
