#include "fsn/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fsn/error.hpp"

namespace fsn {

namespace {

constexpr char kDatasetMagic[4] = {'F', 'S', 'F', '1'};
constexpr char kCheckpointMagic[4] = {'F', 'S', 'C', '1'};

template <typename T>
void write_le(std::ostream& os, T v) {
    // host is little-endian on all supported targets
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const char* what) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw DataError(std::string("truncated file while reading ") + what);
    return v;
}

FeatureDataset load_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kDatasetMagic, 4) != 0)
        throw DataError("malformed header: bad magic in " + path.string());
    FeatureDataset ds;
    ds.dim = read_le<std::uint32_t>(is, "dim");
    const auto class_count = read_le<std::uint32_t>(is, "class count");
    const auto sample_count = read_le<std::uint32_t>(is, "sample count");
    ds.relu_constraint = read_le<std::uint8_t>(is, "relu flag") != 0;
    for (int i = 0; i < 3; ++i)
        if (read_le<std::uint8_t>(is, "reserved bytes") != 0)
            throw DataError("malformed header: nonzero reserved byte");
    ds.classes.resize(class_count);
    for (auto& c : ds.classes) c = read_le<std::uint32_t>(is, "class table");
    ds.samples.resize(sample_count);
    for (std::uint32_t row = 0; row < sample_count; ++row) {
        auto& s = ds.samples[row];
        s.label = read_le<std::uint32_t>(is, "sample label");
        s.feature.resize(ds.dim);
        if (!is.read(reinterpret_cast<char*>(s.feature.data()),
                     static_cast<std::streamsize>(ds.dim) * sizeof(float)))
            throw DataError("dimension mismatch at row " + std::to_string(row));
    }
    ds.name = path.stem().string();
    ds.validate();
    return ds;
}

FeatureDataset load_text(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw DataError("malformed header: empty file");
    std::uint32_t dim = 0;
    {
        std::stringstream hs(line);
        std::string tok;
        if (!std::getline(hs, tok, ',') || tok != "label")
            throw DataError("malformed header: expected 'label' column");
        while (std::getline(hs, tok, ',')) {
            if (tok != "f" + std::to_string(dim))
                throw DataError("malformed header: expected column f" + std::to_string(dim));
            dim++;
        }
    }
    FeatureDataset ds;
    ds.dim = dim;
    std::size_t row = 0;
    bool all_nonneg = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string tok;
        LabeledFeature s;
        if (!std::getline(ls, tok, ','))
            throw DataError("missing label at row " + std::to_string(row));
        s.label = static_cast<std::uint32_t>(std::stoul(tok));
        while (std::getline(ls, tok, ','))
            s.feature.push_back(std::stof(tok));
        if (s.feature.size() != dim)
            throw DataError("dimension mismatch at row " + std::to_string(row));
        for (float v : s.feature) all_nonneg = all_nonneg && v >= 0.0f;
        if (!ds.has_class(s.label)) ds.classes.push_back(s.label);
        ds.samples.push_back(std::move(s));
        row++;
    }
    ds.relu_constraint = all_nonneg;
    ds.name = path.stem().string();
    ds.validate();
    return ds;
}

}  // namespace

FeatureDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    return format == DatasetFormat::binary ? load_binary(path) : load_text(path);
}

void save_dataset(const FeatureDataset& ds, const std::filesystem::path& path,
                  DatasetFormat format) {
    ds.validate();
    if (format == DatasetFormat::binary) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw DataError("cannot write " + path.string());
        os.write(kDatasetMagic, 4);
        write_le<std::uint32_t>(os, ds.dim);
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ds.classes.size()));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ds.samples.size()));
        write_le<std::uint8_t>(os, ds.relu_constraint ? 1 : 0);
        for (int i = 0; i < 3; ++i) write_le<std::uint8_t>(os, 0);
        for (auto c : ds.classes) write_le<std::uint32_t>(os, c);
        for (const auto& s : ds.samples) {
            write_le<std::uint32_t>(os, s.label);
            os.write(reinterpret_cast<const char*>(s.feature.data()),
                     static_cast<std::streamsize>(ds.dim) * sizeof(float));
        }
        if (!os) throw DataError("write failure on " + path.string());
    } else {
        std::ofstream os(path);
        if (!os) throw DataError("cannot write " + path.string());
        os << "label";
        for (std::uint32_t j = 0; j < ds.dim; ++j) os << ",f" << j;
        os << "\n";
        os.precision(9);
        for (const auto& s : ds.samples) {
            os << s.label;
            for (float v : s.feature) os << "," << v;
            os << "\n";
        }
        if (!os) throw DataError("write failure on " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw DataError("malformed checkpoint: bad magic in " + path.string());
    Checkpoint ckpt;
    auto& clf = ckpt.classifier;
    clf.dim = read_le<std::uint32_t>(is, "dim");
    clf.base_class_count = read_le<std::uint32_t>(is, "base count");
    clf.novel_class_count = read_le<std::uint32_t>(is, "novel count");
    if (clf.dim == 0) throw DataError("malformed checkpoint: zero dimensionality");
    clf.weights.resize(static_cast<std::size_t>(clf.dim) * clf.class_count());
    if (!is.read(reinterpret_cast<char*>(clf.weights.data()),
                 static_cast<std::streamsize>(clf.weights.size()) * sizeof(double)))
        throw DataError("truncated checkpoint weights");
    clf.class_map.resize(clf.class_count());
    for (std::uint32_t i = 0; i < clf.class_map.size(); ++i) clf.class_map[i] = i;
    // optional trailing affine block
    std::uint32_t count;
    if (is.read(reinterpret_cast<char*>(&count), sizeof(count))) {
        if (count != clf.class_count())
            throw DataError("affine block count mismatch");
        AffineParams ap;
        ap.gamma.resize(count);
        ap.beta.resize(count);
        if (!is.read(reinterpret_cast<char*>(ap.gamma.data()), count * sizeof(double)) ||
            !is.read(reinterpret_cast<char*>(ap.beta.data()), count * sizeof(double)))
            throw DataError("truncated affine block");
        ckpt.affine = std::move(ap);
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto& clf = ckpt.classifier;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os.write(kCheckpointMagic, 4);
    write_le<std::uint32_t>(os, clf.dim);
    write_le<std::uint32_t>(os, clf.base_class_count);
    write_le<std::uint32_t>(os, clf.novel_class_count);
    os.write(reinterpret_cast<const char*>(clf.weights.data()),
             static_cast<std::streamsize>(clf.weights.size()) * sizeof(double));
    if (ckpt.affine) {
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.affine->size()));
        os.write(reinterpret_cast<const char*>(ckpt.affine->gamma.data()),
                 static_cast<std::streamsize>(ckpt.affine->size()) * sizeof(double));
        os.write(reinterpret_cast<const char*>(ckpt.affine->beta.data()),
                 static_cast<std::streamsize>(ckpt.affine->size()) * sizeof(double));
    }
    if (!os) throw DataError("write failure on " + path.string());
}

}  // namespace fsn
