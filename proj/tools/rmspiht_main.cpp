#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rms/errors.hpp"
#include "rms/fusion.hpp"
#include "rms/image.hpp"
#include "rms/metrics.hpp"
#include "rms/remspiht.hpp"
#include "rms/spiht.hpp"
#include "rms/wavelet.hpp"
#include "rms/weighting.hpp"

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw rms::IoError("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    if (f.bad())
        throw rms::IoError("read failed on " + path);
    return bytes;
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw rms::IoError("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw rms::IoError("write failed on " + path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw rms::IoError("cannot open " + path + " for writing");
    f << text;
    if (!f)
        throw rms::IoError("write failed on " + path);
}

const char* coder_name(const rms::SpihtBitstream& bs) {
    return bs.remspiht ? "remspiht" : "spiht";
}

// Label image on the coarsest-level grid: each tree's cell takes its cluster,
// the childless top-left cell of every 2x2 group takes the majority label of
// the other three (ties to the smaller cluster id).
rms::GrayImage label_image(const std::vector<rms::TreeFeature>& features,
                           const std::vector<int>& assignments, int k, int ll_w,
                           int ll_h) {
    rms::GrayImage img;
    img.width = ll_w;
    img.height = ll_h;
    img.pixels.assign(static_cast<size_t>(ll_w) * ll_h, 0.0);
    std::vector<int> grid(img.pixels.size(), 0);
    for (size_t t = 0; t < features.size(); ++t) {
        const rms::Coord& r = features[t].root;
        grid[static_cast<size_t>(r.i) * ll_w + r.j] = assignments[t];
    }
    for (int i = 0; i < ll_h; i += 2) {
        for (int j = 0; j < ll_w; j += 2) {
            std::vector<int> votes(static_cast<size_t>(k), 0);
            ++votes[grid[static_cast<size_t>(i) * ll_w + j + 1]];
            ++votes[grid[static_cast<size_t>(i + 1) * ll_w + j]];
            ++votes[grid[static_cast<size_t>(i + 1) * ll_w + j + 1]];
            int best = 0;
            for (int c = 1; c < k; ++c)
                if (votes[c] > votes[best])
                    best = c;
            grid[static_cast<size_t>(i) * ll_w + j] = best;
        }
    }
    int step = k > 1 ? 255 / (k - 1) : 0;
    for (size_t t = 0; t < grid.size(); ++t)
        img.pixels[t] = grid[t] * step;
    return img;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavelet image fusion and progressive compression toolkit"};
    app.require_subcommand(1);

    std::map<std::string, rms::Mode> mode_map{{"int", rms::Mode::IntegerLifting},
                                              {"float", rms::Mode::OrthonormalFloat}};
    std::map<std::string, rms::FusionRule> rule_map{{"avg", rms::FusionRule::Averaging},
                                                    {"max", rms::FusionRule::Maximum},
                                                    {"min", rms::FusionRule::Minimum},
                                                    {"pca", rms::FusionRule::PCA}};
    std::map<std::string, rms::MaskPolicy> policy_map{{"all", rms::MaskPolicy::All},
                                                      {"any", rms::MaskPolicy::Any}};

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "fuse two grayscale images");
    std::string fuse_in1, fuse_in2, fuse_out;
    rms::FusionRule fuse_rule = rms::FusionRule::Averaging;
    int fuse_levels = 3;
    rms::Mode fuse_mode = rms::Mode::IntegerLifting;
    fuse_cmd->add_option("input1", fuse_in1, "first input PGM")->required();
    fuse_cmd->add_option("input2", fuse_in2, "second input PGM")->required();
    fuse_cmd->add_option("-o,--output", fuse_out, "fused output PGM")->required();
    fuse_cmd->add_option("--rule", fuse_rule, "combination rule (avg|max|min|pca)")
        ->transform(CLI::CheckedTransformer(rule_map))
        ->default_str("avg");
    fuse_cmd->add_option("--levels", fuse_levels, "decomposition levels")->capture_default_str();
    fuse_cmd->add_option("--mode", fuse_mode, "transform arithmetic (int|float)")
        ->transform(CLI::CheckedTransformer(mode_map))
        ->default_str("int");

    // encode
    auto* enc_cmd = app.add_subcommand("encode", "compress a grayscale image");
    std::string enc_in, enc_out, enc_coder = "spiht", enc_mask = "case2";
    uint64_t enc_budget = rms::kUnbounded;
    int enc_levels = 3, enc_shift = 2, enc_u0 = 0, enc_k = 2, enc_em = 0;
    uint32_t enc_seed = 0;
    double enc_m = 0.5, enc_lambda = 4.0;
    rms::Mode enc_mode = rms::Mode::IntegerLifting;
    rms::MaskPolicy enc_policy = rms::MaskPolicy::All;
    enc_cmd->add_option("input", enc_in, "input PGM")->required();
    enc_cmd->add_option("-o,--output", enc_out, "output stream file")->required();
    enc_cmd->add_option("--coder", enc_coder, "coder variant")->capture_default_str()
        ->check(CLI::IsMember({"spiht", "remspiht"}));
    enc_cmd->add_option("--budget-bits", enc_budget,
                        "total stream bit budget (default unbounded)");
    enc_cmd->add_option("--levels", enc_levels, "decomposition levels")->capture_default_str();
    enc_cmd->add_option("--mode", enc_mode, "transform arithmetic (int|float)")
        ->transform(CLI::CheckedTransformer(mode_map))
        ->default_str("int");
    enc_cmd->add_option("--scale-shift", enc_shift, "support scaling exponent")->capture_default_str();
    enc_cmd->add_option("--mask", enc_mask, "support mask source")->capture_default_str()
        ->check(CLI::IsMember({"case1", "case2"}));
    enc_cmd->add_option("--u0", enc_u0, "case1 threshold pass index")->capture_default_str();
    enc_cmd->add_option("--policy", enc_policy, "case1 cross-band rule (all|any)")
        ->transform(CLI::CheckedTransformer(policy_map))
        ->default_str("all");
    enc_cmd->add_option("--k", enc_k, "case2 cluster count")->capture_default_str();
    enc_cmd->add_option("--seed", enc_seed, "case2 clustering seed")->capture_default_str();
    enc_cmd->add_option("--em-iters", enc_em, "case2 mixture refinement steps")->capture_default_str();
    enc_cmd->add_option("--m", enc_m, "retained coefficients (fraction or count)")->capture_default_str();
    enc_cmd->add_option("--lambda", enc_lambda, "importance weight slope")->capture_default_str();

    // decode
    auto* dec_cmd = app.add_subcommand("decode", "reconstruct an image from a stream");
    std::string dec_in, dec_out;
    uint64_t dec_upto = 0;
    dec_cmd->add_option("input", dec_in, "input stream file")->required();
    dec_cmd->add_option("-o,--output", dec_out, "output PGM")->required();
    auto* upto_opt = dec_cmd->add_option("--upto-bits", dec_upto,
                                         "decode only this payload-bit prefix");

    // segment
    auto* seg_cmd = app.add_subcommand("segment", "cluster spatial-orientation trees");
    std::string seg_in, seg_out, seg_csv;
    int seg_k = 2, seg_levels = 3;
    uint32_t seg_seed = 0;
    rms::Mode seg_mode = rms::Mode::IntegerLifting;
    seg_cmd->add_option("input", seg_in, "input PGM")->required();
    seg_cmd->add_option("-o,--output", seg_out, "label image PGM")->required();
    seg_cmd->add_option("--k", seg_k, "cluster count")->capture_default_str();
    seg_cmd->add_option("--seed", seg_seed, "seeding RNG state")->capture_default_str();
    seg_cmd->add_option("--levels", seg_levels, "decomposition levels")->capture_default_str();
    seg_cmd->add_option("--mode", seg_mode, "transform arithmetic (int|float)")
        ->transform(CLI::CheckedTransformer(mode_map))
        ->default_str("int");
    seg_cmd->add_option("--csv", seg_csv, "write per-cluster statistics here");

    // metrics
    auto* met_cmd = app.add_subcommand("metrics", "rate/distortion report for a stream");
    std::string met_orig, met_dec, met_stream, met_csv;
    met_cmd->add_option("--orig", met_orig, "original PGM")->required();
    met_cmd->add_option("--decoded", met_dec, "decoded PGM")->required();
    met_cmd->add_option("--stream", met_stream, "compressed stream file")->required();
    met_cmd->add_option("--csv", met_csv, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*fuse_cmd) {
            rms::GrayImage a = rms::load_pgm(fuse_in1);
            rms::GrayImage b = rms::load_pgm(fuse_in2);
            auto [ca, cb] = rms::crop_to_common(a, b);
            rms::GrayImage fused = rms::fuse(ca, cb, fuse_rule, fuse_levels, fuse_mode);
            rms::save_pgm(fused, fuse_out);
        } else if (*enc_cmd) {
            rms::GrayImage img = rms::load_pgm(enc_in);
            rms::WaveletPyramid pyr = rms::dwt2(img, enc_levels, enc_mode);
            rms::SpihtBitstream bs;
            if (enc_coder == "spiht") {
                bs = rms::encode(pyr, enc_budget);
            } else {
                rms::RemspihtConfig cfg;
                cfg.scale_shift = enc_shift;
                cfg.m = enc_m;
                cfg.lambda = enc_lambda;
                cfg.budget = enc_budget;
                if (enc_mask == "case1")
                    cfg.mask_source = rms::CaseI{enc_u0, enc_policy};
                else
                    cfg.mask_source = rms::CaseII{enc_k, enc_seed, enc_em};
                bs = rms::encode_remspiht(pyr, cfg);
            }
            write_file(enc_out, bs.serialize());
        } else if (*dec_cmd) {
            rms::SpihtBitstream bs = rms::SpihtBitstream::parse(read_file(dec_in));
            std::optional<uint64_t> upto;
            if (*upto_opt)
                upto = dec_upto;
            rms::WaveletPyramid pyr = rms::decode(bs, upto);
            rms::save_pgm(rms::idwt2(pyr), dec_out);
        } else if (*seg_cmd) {
            rms::GrayImage img = rms::load_pgm(seg_in);
            rms::WaveletPyramid pyr = rms::dwt2(img, seg_levels, seg_mode);
            std::vector<rms::TreeFeature> features = rms::extract_features(pyr);
            rms::KmeansResult km = rms::kmeans(features, seg_k, 50, seg_seed);
            rms::save_pgm(label_image(features, km.assignments, seg_k, pyr.ll_width(),
                                      pyr.ll_height()),
                          seg_out);
            if (!seg_csv.empty()) {
                std::vector<rms::ClusterStat> stats =
                    rms::cluster_stats(pyr, km.assignments, seg_k);
                std::string text = "cluster_id,size,entropy_bits,nonzero_count,score\n";
                for (const rms::ClusterStat& st : stats) {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf), "%d,%zu,%.6f,%zu,%.6f\n",
                                  st.cluster_id, st.size, st.entropy_bits,
                                  st.nonzero_count, st.score);
                    text += buf;
                }
                write_text(seg_csv, text);
            }
        } else if (*met_cmd) {
            rms::GrayImage orig = rms::load_pgm(met_orig);
            rms::GrayImage dec = rms::load_pgm(met_dec);
            rms::SpihtBitstream bs = rms::SpihtBitstream::parse(read_file(met_stream));
            rms::MetricsRow row;
            row.image = met_orig;
            row.coder = coder_name(bs);
            row.budget_bits = bs.total_bits();
            row.psnr_db = rms::psnr(orig, dec);
            row.mse = rms::mse(orig, dec);
            row.cr = rms::compression_ratio(orig, bs);
            row.entropy_bits = rms::entropy(dec.pixels, rms::Binning::Pixel256);
            std::string text = rms::metrics_csv_header() + "\n" +
                               rms::metrics_csv_row(row) + "\n";
            if (met_csv.empty())
                std::cout << text;
            else
                write_text(met_csv, text);
        }
    } catch (const rms::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
