#include "maskbench/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace maskbench {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'R', 'B'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64_span(const double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) f64(p[i]);
    }
    void matrix(const Matrix& m) {
        u64(m.rows);
        u64(m.cols);
        f64_span(m.data.data(), m.data.size());
    }
    void int_vec(const std::vector<int>& v) {
        u64(v.size());
        for (int x : v) i32(x);
    }
    void f64_vec(const std::vector<double>& v) {
        u64(v.size());
        f64_span(v.data(), v.size());
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    Matrix matrix() {
        Matrix m;
        m.rows = u64();
        m.cols = u64();
        check_count(m.rows * m.cols);
        m.data.resize(m.rows * m.cols);
        for (double& v : m.data) v = f64();
        return m;
    }
    std::vector<int> int_vec() {
        std::size_t n = u64();
        check_count(n);
        std::vector<int> v(n);
        for (int& x : v) x = i32();
        return v;
    }
    std::vector<double> f64_vec() {
        std::size_t n = u64();
        check_count(n);
        std::vector<double> v(n);
        for (double& x : v) x = f64();
        return v;
    }
    void expect_end() const {
        if (pos_ != bytes_.size())
            throw ModelFormatError("model file has " +
                                   std::to_string(bytes_.size() - pos_) +
                                   " trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            throw ModelFormatError("model file truncated at byte " +
                                   std::to_string(pos_));
    }
    void check_count(std::size_t n) const {
        // Each element takes at least 4 bytes; reject absurd counts early.
        if (n > (bytes_.size() - pos_) / 4 + 1)
            throw ModelFormatError("model file truncated at byte " +
                                   std::to_string(pos_) + " (bad element count)");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

enum class Tag : std::uint8_t { Svc = 1, Lda = 2, Knn = 3, Dt = 4, Lr = 5, Nb = 6 };

void write_common(Writer& w, std::uint64_t fingerprint, std::size_t dim,
                  const std::vector<int>& classes) {
    w.u64(fingerprint);
    w.u64(dim);
    w.int_vec(classes);
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const TrainedModel& m) {
    Writer w;
    w.u8(static_cast<std::uint8_t>(kMagic[0]));
    w.u8(static_cast<std::uint8_t>(kMagic[1]));
    w.u8(static_cast<std::uint8_t>(kMagic[2]));
    w.u8(static_cast<std::uint8_t>(kMagic[3]));
    w.u32(kVersion);

    if (const auto* svc = std::get_if<SvcModel>(&m)) {
        w.u8(static_cast<std::uint8_t>(Tag::Svc));
        write_common(w, svc->lbp_fingerprint, svc->dim, svc->classes);
        w.matrix(svc->weights);
        w.f64_vec(svc->biases);
        w.f64(svc->cost);
        w.u32(static_cast<std::uint32_t>(svc->iters));
        w.matrix(svc->objective_trace);
        w.f64_vec(svc->final_objectives);
        w.f64(svc->final_hinge);
        w.u8(svc->non_separable ? 1 : 0);
    } else if (const auto* lda = std::get_if<LdaModel>(&m)) {
        w.u8(static_cast<std::uint8_t>(Tag::Lda));
        write_common(w, lda->lbp_fingerprint, lda->dim, lda->classes);
        w.matrix(lda->means);
        w.matrix(lda->weights);
        w.f64_vec(lda->biases);
        w.f64_vec(lda->log_priors);
        w.f64(lda->shrinkage);
    } else if (const auto* knn = std::get_if<KnnModel>(&m)) {
        w.u8(static_cast<std::uint8_t>(Tag::Knn));
        write_common(w, knn->lbp_fingerprint, knn->dim, knn->classes);
        w.matrix(knn->features);
        w.int_vec(knn->labels);
        w.u32(static_cast<std::uint32_t>(knn->k));
        w.u8(static_cast<std::uint8_t>(knn->metric));
    } else if (const auto* dt = std::get_if<DtModel>(&m)) {
        w.u8(static_cast<std::uint8_t>(Tag::Dt));
        write_common(w, dt->lbp_fingerprint, dt->dim, dt->classes);
        w.u32(static_cast<std::uint32_t>(dt->min_leaf));
        w.u64(dt->nodes.size());
        for (const TreeNode& n : dt->nodes) {
            w.i32(n.feature);
            w.f64(n.threshold);
            w.i32(n.left);
            w.i32(n.right);
            w.i32(n.label);
        }
    } else if (const auto* lr = std::get_if<LrModel>(&m)) {
        w.u8(static_cast<std::uint8_t>(Tag::Lr));
        write_common(w, lr->lbp_fingerprint, lr->dim, lr->classes);
        w.matrix(lr->weights);
        w.f64_vec(lr->biases);
        w.f64(lr->l2);
        w.f64(lr->tol);
        w.u32(static_cast<std::uint32_t>(lr->max_iters));
        w.u32(static_cast<std::uint32_t>(lr->iterations_run));
        w.f64(lr->final_loss);
        w.f64(lr->final_grad_inf_norm);
        w.f64_vec(lr->loss_trace);
    } else if (const auto* nb = std::get_if<NbModel>(&m)) {
        w.u8(static_cast<std::uint8_t>(Tag::Nb));
        write_common(w, nb->lbp_fingerprint, nb->dim, nb->classes);
        w.matrix(nb->means);
        w.matrix(nb->variances);
        w.f64_vec(nb->log_priors);
        w.f64(nb->var_smoothing);
    }
    return w.take();
}

TrainedModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    char magic[4];
    for (char& c : magic) c = static_cast<char>(r.u8());
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ModelFormatError("bad magic, not a model file");
    std::uint32_t version = r.u32();
    if (version != kVersion)
        throw ModelFormatError("unsupported model format version " +
                               std::to_string(version) + ", expected " +
                               std::to_string(kVersion));
    std::uint8_t tag = r.u8();

    TrainedModel out;
    switch (static_cast<Tag>(tag)) {
        case Tag::Svc: {
            SvcModel m;
            m.lbp_fingerprint = r.u64();
            m.dim = r.u64();
            m.classes = r.int_vec();
            m.weights = r.matrix();
            m.biases = r.f64_vec();
            m.cost = r.f64();
            m.iters = static_cast<int>(r.u32());
            m.objective_trace = r.matrix();
            m.final_objectives = r.f64_vec();
            m.final_hinge = r.f64();
            m.non_separable = r.u8() != 0;
            out = std::move(m);
            break;
        }
        case Tag::Lda: {
            LdaModel m;
            m.lbp_fingerprint = r.u64();
            m.dim = r.u64();
            m.classes = r.int_vec();
            m.means = r.matrix();
            m.weights = r.matrix();
            m.biases = r.f64_vec();
            m.log_priors = r.f64_vec();
            m.shrinkage = r.f64();
            out = std::move(m);
            break;
        }
        case Tag::Knn: {
            KnnModel m;
            m.lbp_fingerprint = r.u64();
            m.dim = r.u64();
            m.classes = r.int_vec();
            m.features = r.matrix();
            m.labels = r.int_vec();
            m.k = static_cast<int>(r.u32());
            m.metric = static_cast<KnnMetric>(r.u8());
            out = std::move(m);
            break;
        }
        case Tag::Dt: {
            DtModel m;
            m.lbp_fingerprint = r.u64();
            m.dim = r.u64();
            m.classes = r.int_vec();
            m.min_leaf = static_cast<int>(r.u32());
            std::size_t count = r.u64();
            m.nodes.resize(count);
            for (TreeNode& n : m.nodes) {
                n.feature = r.i32();
                n.threshold = r.f64();
                n.left = r.i32();
                n.right = r.i32();
                n.label = r.i32();
            }
            out = std::move(m);
            break;
        }
        case Tag::Lr: {
            LrModel m;
            m.lbp_fingerprint = r.u64();
            m.dim = r.u64();
            m.classes = r.int_vec();
            m.weights = r.matrix();
            m.biases = r.f64_vec();
            m.l2 = r.f64();
            m.tol = r.f64();
            m.max_iters = static_cast<int>(r.u32());
            m.iterations_run = static_cast<int>(r.u32());
            m.final_loss = r.f64();
            m.final_grad_inf_norm = r.f64();
            m.loss_trace = r.f64_vec();
            out = std::move(m);
            break;
        }
        case Tag::Nb: {
            NbModel m;
            m.lbp_fingerprint = r.u64();
            m.dim = r.u64();
            m.classes = r.int_vec();
            m.means = r.matrix();
            m.variances = r.matrix();
            m.log_priors = r.f64_vec();
            m.var_smoothing = r.f64();
            out = std::move(m);
            break;
        }
        default:
            throw ModelFormatError("unknown model tag " + std::to_string(tag));
    }
    r.expect_end();
    return out;
}

void save_model_file(const std::string& path, const TrainedModel& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    auto bytes = serialize_model(m);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

TrainedModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace maskbench
