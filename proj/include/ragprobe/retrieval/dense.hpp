#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ragprobe/common/error.hpp"
#include "ragprobe/common/jsonl.hpp"
#include "ragprobe/retrieval/types.hpp"

namespace ragprobe::retrieval {

/// Where the query and article encoders live. Query/article encoders may be
/// asymmetric, so they are separate URLs.
struct EncoderEndpoints {
    std::string query_url;
    std::string article_url;
};

inline constexpr int kDenseIndexFormatVersion = 1;

/// Exhaustive inner-product index over unit-normalised passage vectors.
/// Rows are passages; scores for unit vectors equal cosine similarity.
template <typename Scalar>
class BasicDenseIndex {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicDenseIndex() = default;

    /// Normalises every row. Throws InvalidArgument on a size mismatch or a zero row.
    BasicDenseIndex(std::vector<std::string> passage_ids, Matrix vectors, EncoderEndpoints endpoints = {})
        : passage_ids_(std::move(passage_ids)), vectors_(std::move(vectors)), endpoints_(std::move(endpoints))
    {
        if (static_cast<Eigen::Index>(passage_ids_.size()) != vectors_.rows()) {
            throw InvalidArgument("dense index: " + std::to_string(passage_ids_.size()) + " ids for " +
                                  std::to_string(vectors_.rows()) + " vectors");
        }
        for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
            const Scalar norm = vectors_.row(r).norm();
            if (!(norm > Scalar(0))) {
                throw InvalidArgument("dense index: zero vector for " + passage_ids_[static_cast<std::size_t>(r)]);
            }
            vectors_.row(r) /= norm;
        }
    }

    static BasicDenseIndex from_rows(std::vector<std::string> passage_ids,
                                     const std::vector<std::vector<Scalar>>& rows, EncoderEndpoints endpoints = {})
    {
        const Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
        Matrix m(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<Eigen::Index>(rows[r].size()) != d) {
                throw InvalidArgument("dense index: vector " + std::to_string(r) + " has dimension " +
                                      std::to_string(rows[r].size()) + ", expected " + std::to_string(d));
            }
            m.row(static_cast<Eigen::Index>(r)) =
                Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(rows[r].data(), d);
        }
        return BasicDenseIndex(std::move(passage_ids), std::move(m), std::move(endpoints));
    }

    Eigen::Index dimension() const { return vectors_.cols(); }
    std::size_t size() const { return passage_ids_.size(); }
    const Matrix& vectors() const { return vectors_; }
    const std::vector<std::string>& passage_ids() const { return passage_ids_; }
    const EncoderEndpoints& endpoints() const { return endpoints_; }

    /// Top-k by inner product, ties by ascending passage_id. Throws InvalidArgument on dimension mismatch.
    SearchResult search(const Eigen::Ref<const Vector>& query, std::size_t k) const
    {
        if (k == 0) {
            throw InvalidArgument("k must be >= 1");
        }
        if (query.size() != dimension()) {
            throw InvalidArgument("query dimension " + std::to_string(query.size()) + " != index dimension " +
                                  std::to_string(dimension()));
        }
        const Vector scores = vectors_ * query;
        std::vector<std::size_t> order(size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t take = std::min(k, order.size());
        auto better = [&](std::size_t a, std::size_t b) {
            const Scalar sa = scores(static_cast<Eigen::Index>(a));
            const Scalar sb = scores(static_cast<Eigen::Index>(b));
            if (sa != sb) {
                return sa > sb;
            }
            return passage_ids_[a] < passage_ids_[b];
        };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
        SearchResult out;
        for (std::size_t i = 0; i < take; ++i) {
            out.hits.push_back(RetrievalHit{passage_ids_[order[i]],
                                            static_cast<double>(scores(static_cast<Eigen::Index>(order[i]))), i + 1});
        }
        return out;
    }

    void save(const std::filesystem::path& path, const std::string& corpus_checksum) const
    {
        Json j;
        j["format"] = "ragprobe.dense_index";
        j["version"] = kDenseIndexFormatVersion;
        j["corpus_checksum"] = corpus_checksum;
        j["dimension"] = dimension();
        j["query_url"] = endpoints_.query_url;
        j["article_url"] = endpoints_.article_url;
        j["passage_ids"] = passage_ids_;
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
            std::vector<Scalar> row(vectors_.row(r).data(), vectors_.row(r).data() + vectors_.cols());
            rows.push_back(row);
        }
        j["vectors"] = std::move(rows);
        write_file_atomic(path, j.dump());
    }

    static BasicDenseIndex load(const std::filesystem::path& path, const std::string& expected_checksum = {})
    {
        auto j = Json::parse(read_file(path));
        if (j.value("format", std::string{}) != "ragprobe.dense_index" ||
            j.value("version", 0) != kDenseIndexFormatVersion) {
            throw SchemaError(path.string() + ": not a version " + std::to_string(kDenseIndexFormatVersion) +
                              " dense index");
        }
        if (!expected_checksum.empty() && j.value("corpus_checksum", std::string{}) != expected_checksum) {
            throw ConflictError(path.string() + ": index was built from a different corpus state");
        }
        auto rows = j.at("vectors").get<std::vector<std::vector<Scalar>>>();
        return from_rows(j.at("passage_ids").get<std::vector<std::string>>(), rows,
                         EncoderEndpoints{j.value("query_url", std::string{}), j.value("article_url", std::string{})});
    }

private:
    std::vector<std::string> passage_ids_;
    Matrix vectors_;
    EncoderEndpoints endpoints_;
};

using DenseIndex = BasicDenseIndex<double>;

template <typename Scalar>
SearchResult search_dense(const BasicDenseIndex<Scalar>& index,
                          const Eigen::Ref<const typename BasicDenseIndex<Scalar>::Vector>& query_vector, std::size_t k)
{
    return index.search(query_vector, k);
}

/// Returns v / ||v||. Throws InvalidArgument for a zero vector.
template <typename Scalar>
std::vector<Scalar> normalized(std::vector<Scalar> v)
{
    Scalar sq = 0;
    for (Scalar x : v) {
        sq += x * x;
    }
    const Scalar norm = std::sqrt(sq);
    if (!(norm > Scalar(0))) {
        throw InvalidArgument("cannot normalise a zero vector");
    }
    for (auto& x : v) {
        x /= norm;
    }
    return v;
}

} // namespace ragprobe::retrieval
