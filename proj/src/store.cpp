#include "cbir/store.hpp"
#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <thread>

namespace cbir {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class ByteWriter {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    template <typename T>
    void le(T v) {
        static_assert(std::is_integral_v<T>);
        using U = std::make_unsigned_t<T>;
        U u = static_cast<U>(v);
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        le(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            throw Error(ErrorKind::TruncatedFile, "unexpected end of file at byte " + std::to_string(pos_));
    }
    template <typename T>
    T le() {
        static_assert(std::is_integral_v<T>);
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<std::make_unsigned_t<T>>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    std::string str() {
        const auto n = le<std::uint32_t>();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void magic(const char (&expected)[5]) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, expected, 4) != 0)
            throw Error(ErrorKind::BadMagic, std::string("expected '") + expected + "'");
        pos_ += 4;
    }
    void expect_end() const {
        if (pos_ != bytes_.size())
            throw Error(ErrorKind::CorruptFile, std::to_string(bytes_.size() - pos_) + " trailing bytes");
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void check_version(std::uint16_t found, std::uint16_t supported) {
    if (found != supported)
        throw Error(ErrorKind::UnsupportedVersion,
                    "format version " + std::to_string(found) + ", supported " + std::to_string(supported));
}

} // namespace

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error(ErrorKind::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorKind::IoError, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

IngestReport ingest_dataset(const fs::path& root, const IngestOptions& options) {
    if (!fs::is_directory(root))
        throw Error(ErrorKind::EmptyDataset, root.string() + " is not a directory");

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory())
            class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty())
        throw Error(ErrorKind::EmptyDataset, root.string() + " has no class subdirectories");

    struct Job {
        std::string label;
        fs::path file;
    };
    std::vector<Job> jobs;
    for (const fs::path& dir : class_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file())
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (auto& f : files)
            jobs.push_back({dir.filename().string(), std::move(f)});
    }

    std::vector<std::optional<Descriptor>> results(jobs.size());
    std::atomic<std::size_t> next{0}, done{0};
    auto worker = [&] {
        for (std::size_t k; (k = next++) < jobs.size();) {
            try {
                results[k] = compose_descriptor(load_image(jobs[k].file));
            } catch (const Error&) {
                results[k].reset();
            }
            const std::size_t d = ++done;
            if (options.progress)
                options.progress(d, jobs.size());
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1))));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t)
            pool.emplace_back(worker);
        worker();
    }

    IngestReport report;
    FeatureIndexBuilder builder(kDescriptorDim);
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (!results[k]) {
            ++report.skipped;
            report.warnings.push_back("skipped undecodable file " + jobs[k].file.string());
            continue;
        }
        builder.add(jobs[k].label, *results[k], fs::absolute(jobs[k].file).lexically_normal().string());
    }
    if (builder.size() == 0)
        throw Error(ErrorKind::EmptyDataset, "no decodable images under " + root.string());
    report.index = std::move(builder).build();
    return report;
}

// ---------------------------------------------------------------------------
// Index files
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize_index(const FeatureIndex& index) {
    if (index.dim() > 0xFFFF)
        throw Error(ErrorKind::InvalidParameter, "dimension does not fit the index format");
    ByteWriter w;
    w.raw("CBIR", 4);
    w.le<std::uint16_t>(kIndexFormatVersion);
    w.le<std::uint64_t>(index.size());
    w.le<std::uint16_t>(static_cast<std::uint16_t>(index.dim()));
    w.le<std::uint16_t>(index.normalized() ? kIndexFlagNormalized : 0);
    for (std::size_t i = 0; i < index.size(); ++i) {
        w.le<std::uint64_t>(index.id(i));
        w.le<std::uint16_t>(index.label_id(i));
        for (float v : index.raw_row(i))
            w.f32(v);
    }
    w.le<std::uint16_t>(static_cast<std::uint16_t>(index.labels().size()));
    for (const auto& l : index.labels())
        w.str(l);
    for (const auto& p : index.paths())
        w.str(p);
    if (const auto& st = index.norm_stats()) {
        for (double m : st->mean)
            w.f64(m);
        for (double s : st->stddev)
            w.f64(s);
    }
    return w.take();
}

FeatureIndex deserialize_index(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.magic("CBIR");
    check_version(r.le<std::uint16_t>(), kIndexFormatVersion);
    const auto count = r.le<std::uint64_t>();
    const auto dim = r.le<std::uint16_t>();
    const auto flags = r.le<std::uint16_t>();
    if (dim == 0)
        throw Error(ErrorKind::CorruptFile, "zero dimension");
    if (flags & ~kIndexFlagNormalized)
        throw Error(ErrorKind::CorruptFile, "unknown flags");

    // Each record takes 10 + 4*dim bytes; impossible counts are rejected before allocating.
    if (count > bytes.size() / (10 + 4ull * dim))
        throw Error(ErrorKind::TruncatedFile, "record block shorter than its declared count");

    std::vector<std::uint16_t> label_ids(count);
    std::vector<float> raw(count * dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        if (r.le<std::uint64_t>() != i)
            throw Error(ErrorKind::CorruptFile, "record ids are not dense");
        label_ids[i] = r.le<std::uint16_t>();
        for (std::size_t j = 0; j < dim; ++j)
            raw[i * dim + j] = r.f32();
    }
    const auto label_count = r.le<std::uint16_t>();
    std::vector<std::string> labels(label_count);
    for (auto& l : labels)
        l = r.str();
    std::vector<std::string> paths(count);
    for (auto& p : paths)
        p = r.str();
    std::optional<NormStats> stats;
    if (flags & kIndexFlagNormalized) {
        stats.emplace();
        stats->mean.resize(dim);
        stats->stddev.resize(dim);
        for (auto& m : stats->mean)
            m = r.f64();
        for (auto& s : stats->stddev)
            s = r.f64();
    }
    r.expect_end();
    try {
        return FeatureIndex(dim, std::move(labels), std::move(label_ids), std::move(raw), std::move(paths),
                            std::move(stats));
    } catch (const Error& e) {
        throw Error(ErrorKind::CorruptFile, e.what());
    }
}

void save_index(const FeatureIndex& index, const fs::path& path) {
    write_file_atomic(path, serialize_index(index));
}

FeatureIndex load_index(const fs::path& path) {
    return deserialize_index(read_file(path));
}

// ---------------------------------------------------------------------------
// Model files
//
//   "CBSV" u16 version  u8 strategy
//   u16 class_count, class_count x string
//   u32 model_count, model_count x {
//     u16 positive  u16 negative
//     u8 kernel  f64 coef0  i32 degree  f64 sigma
//     f64 C  f64 bias  u8 converged  u64 iterations
//     u16 dim  u8 has_scaling  [dim x f64 mean, dim x f64 stddev]
//     u32 n_sv, n_sv x i8 label, n_sv x f64 alpha, n_sv*dim x f64 support vectors
//   }
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize_model(const MulticlassModel& model) {
    ByteWriter w;
    w.raw("CBSV", 4);
    w.le<std::uint16_t>(kModelFormatVersion);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(model.strategy));
    w.le<std::uint16_t>(static_cast<std::uint16_t>(model.classes.size()));
    for (const auto& c : model.classes)
        w.str(c);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(model.models.size()));
    for (const PairModel& pm : model.models) {
        const BinarySvmModel& m = pm.model;
        w.le<std::uint16_t>(pm.positive);
        w.le<std::uint16_t>(pm.negative);
        w.le<std::uint8_t>(static_cast<std::uint8_t>(m.kernel.kind));
        w.f64(m.kernel.coef0);
        w.le<std::int32_t>(m.kernel.degree);
        w.f64(m.kernel.sigma);
        w.f64(m.C);
        w.f64(m.bias);
        w.le<std::uint8_t>(m.converged ? 1 : 0);
        w.le<std::uint64_t>(m.iterations);
        w.le<std::uint16_t>(static_cast<std::uint16_t>(m.dim()));
        w.le<std::uint8_t>(m.scaling ? 1 : 0);
        if (m.scaling) {
            for (double v : m.scaling->mean)
                w.f64(v);
            for (double v : m.scaling->stddev)
                w.f64(v);
        }
        w.le<std::uint32_t>(static_cast<std::uint32_t>(m.alphas.size()));
        for (int y : m.sv_labels)
            w.le<std::int8_t>(static_cast<std::int8_t>(y));
        for (double a : m.alphas)
            w.f64(a);
        for (double v : m.support_vectors.data)
            w.f64(v);
    }
    return w.take();
}

MulticlassModel deserialize_model(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.magic("CBSV");
    check_version(r.le<std::uint16_t>(), kModelFormatVersion);
    MulticlassModel model;
    const auto strategy = r.le<std::uint8_t>();
    if (strategy > 1)
        throw Error(ErrorKind::CorruptFile, "unknown multiclass strategy");
    model.strategy = static_cast<MulticlassStrategy>(strategy);
    model.classes.resize(r.le<std::uint16_t>());
    for (auto& c : model.classes)
        c = r.str();
    const auto count = r.le<std::uint32_t>();
    if (count > bytes.size())
        throw Error(ErrorKind::TruncatedFile, "model block shorter than its declared count");
    model.models.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        PairModel pm;
        pm.positive = r.le<std::uint16_t>();
        pm.negative = r.le<std::uint16_t>();
        if (pm.positive >= model.classes.size() ||
            (pm.negative != kRestClass && pm.negative >= model.classes.size()))
            throw Error(ErrorKind::CorruptFile, "pair refers to an unknown class");
        BinarySvmModel& m = pm.model;
        const auto kind = r.le<std::uint8_t>();
        if (kind > 2)
            throw Error(ErrorKind::CorruptFile, "unknown kernel kind");
        m.kernel.kind = static_cast<KernelKind>(kind);
        m.kernel.coef0 = r.f64();
        m.kernel.degree = r.le<std::int32_t>();
        m.kernel.sigma = r.f64();
        m.C = r.f64();
        m.bias = r.f64();
        m.converged = r.le<std::uint8_t>() != 0;
        m.iterations = r.le<std::uint64_t>();
        const auto dim = r.le<std::uint16_t>();
        if (r.le<std::uint8_t>()) {
            m.scaling.emplace();
            m.scaling->mean.resize(dim);
            m.scaling->stddev.resize(dim);
            for (auto& v : m.scaling->mean)
                v = r.f64();
            for (auto& v : m.scaling->stddev)
                v = r.f64();
        }
        const auto n_sv = r.le<std::uint32_t>();
        r.need(static_cast<std::size_t>(n_sv) * (1 + 8 + 8ull * dim));
        m.sv_labels.resize(n_sv);
        for (int& y : m.sv_labels) {
            y = r.le<std::int8_t>();
            if (y != 1 && y != -1)
                throw Error(ErrorKind::CorruptFile, "support vector label must be +1 or -1");
        }
        m.alphas.resize(n_sv);
        for (double& a : m.alphas)
            a = r.f64();
        m.support_vectors = Matrix(n_sv, dim);
        for (double& v : m.support_vectors.data)
            v = r.f64();
        try {
            m.kernel.validate();
        } catch (const Error& e) {
            throw Error(ErrorKind::CorruptFile, e.what());
        }
        model.models.push_back(std::move(pm));
    }
    r.expect_end();
    return model;
}

void save_model(const MulticlassModel& model, const fs::path& path) {
    write_file_atomic(path, serialize_model(model));
}

MulticlassModel load_model(const fs::path& path) {
    return deserialize_model(read_file(path));
}

} // namespace cbir
