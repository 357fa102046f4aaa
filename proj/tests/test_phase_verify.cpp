// SPDX-License-Identifier: Apache-2.0

#include "riadof/phase_verify.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace riadof;

namespace {

bool all_pass(const std::vector<RankReport>& r)
{
    return !r.empty() && std::all_of(r.begin(), r.end(), [](const RankReport& x) { return x.pass; });
}

double residual(const RankReport& r, const std::string& name)
{
    for (const auto& [n, v] : r.residual_norms)
        if (n == name)
            return v;
    FAIL("missing residual " << name);
    return 0.0;
}

std::vector<int> iota_users(int n)
{
    std::vector<int> u(static_cast<size_t>(n));
    std::iota(u.begin(), u.end(), 0);
    return u;
}

} // namespace

TEST_CASE("MAT-like phase 1 on (3,2,3) with two pairs")
{
    const SystemConfig cfg{3, 2, 3};
    const ChannelRealization real = ChannelRealization::generate(cfg, 2, 5);
    RngStream rng(5, Stream::Precoder);
    CsitAudit audit;
    const MatBlock b = build_mat_block(cfg, {0, 1}, 1, real, &audit, rng);
    CHECK(b.slots == 2);
    CHECK(b.streams == 6);
    for (size_t a = 0; a < 2; ++a) {
        const ComplexMatrix A = mat_decoding_stack(b, a);
        CHECK(A.rows() == 6);
        CHECK(A.cols() == 6);
        CHECK(numeric_rank(A) == 6);
    }
    // Each receiver keeps M of its 2N observations per block; the other N overheard rows are the order-2 symbols.
    CHECK(b.PG[0][1].rows() == 3);
    CHECK(audit.violations() == 0);

    const auto reports = verify_phase1_mat(cfg, 2, 100, 1);
    CHECK(reports.size() == 200);
    CHECK(all_pass(reports));
}

TEST_CASE("MAT-like phase 1 on (K,1,K)")
{
    for (int K = 2; K <= 5; ++K)
        for (int n = 2; n <= K; ++n) {
            const auto r = verify_phase1_mat({K, 1, K}, n, 20, 3);
            CHECK(all_pass(r));
            CHECK(r.front().claimed_rank == n);
        }
}

TEST_CASE("identical receivers are detected")
{
    // Receivers 0 and 1 see the same channels in every slot.
    VerifyOptions opt;
    opt.tamper = [](ChannelRealization& real) {
        const SystemConfig& c = real.config();
        for (int t = 1; t <= real.horizon(); ++t)
            for (int k = 0; k < c.K; ++k)
                real.set(1, k, t, real.channel(0, k, t));
    };
    const auto dir = std::filesystem::temp_directory_path() / "riadof_tamper_dump";
    std::filesystem::remove_all(dir);
    opt.dump_dir = dir;
    const auto reports = verify_phase1_mat({3, 2, 3}, 2, 3, 11, opt);
    CHECK_FALSE(all_pass(reports));
    const VerifySummary s = summarize("phase1-mat", {3, 2, 3}, 2, 3, 11, reports);
    CHECK_FALSE(s.all_pass());
    CHECK(s.failed.size() == 3);
    CHECK(s.failed.front().second == trial_seed(11, 0));

    // The dump replays the tampered channels.
    const auto file = dir / ("phase1-mat_trial0_seed" + std::to_string(trial_seed(11, 0)) + ".bin");
    REQUIRE(std::filesystem::exists(file));
    std::ifstream in(file, std::ios::binary);
    const ChannelRealization back = load_realization(in);
    CHECK(back.channel(1, 2, 1) == back.channel(0, 2, 1));
    std::filesystem::remove_all(dir);
}

TEST_CASE("RT-PIN block structure on (3,2,3)")
{
    const SystemConfig cfg{3, 2, 3};
    const ChannelRealization real = ChannelRealization::generate(cfg, 11, 21);
    RngStream rng(21, Stream::Precoder);
    CsitAudit audit;
    const RtPinBlock b = build_rtpin_block(cfg, 3, iota_users(3), 1, real, &audit, rng);
    CHECK(b.t1 == 8);
    CHECK(b.t2 == 3);
    CHECK(b.streams == 24);
    CHECK(b.common_dim == 8);
    for (size_t j = 0; j < 3; ++j) {
        CHECK(b.W_is[j].rows() == 24);
        CHECK(b.V[j].rows() == 8);
        CHECK(b.C[j].rows() == 9);
        CHECK(b.C[j].cols() == 8);
    }
    for (size_t k = 0; k < 3; ++k)
        for (size_t j = 0; j < 3; ++j) {
            if (k == j)
                continue;
            // Q nulls Tx j over all 22 observations and keeps N t2 = 6 rows.
            CHECK(b.B[k][j].rows() == 22);
            CHECK(b.Q[k][j].rows() == 6);
            CHECK((b.Q[k][j] * b.B[k][j]).norm() / b.B[k][j].norm() < 1e-10);
        }
    for (size_t k = 0; k < 3; ++k) {
        const ComplexMatrix A = rtpin_decoding_stack(b, k);
        CHECK(A.rows() == 24);
        CHECK(A.cols() == 24);
        CHECK(numeric_rank(A) == 24);
    }
    CHECK(audit.violations() == 0);
    CHECK(audit.granted() > 0);
}

TEST_CASE("RT-PIN rank suites")
{
    SUBCASE("(3,2,3), n = 3")
    {
        const auto r = verify_phase1_rtpin({3, 2, 3}, 3, 30, 1);
        CHECK(all_pass(r));
        CHECK(r.front().claimed_rank == 24);
        CHECK(residual(r.front(), "annihilation_Q") < 1e-10);
    }
    SUBCASE("(1,1,3), n = 3")
    {
        const auto r = verify_phase1_rtpin({1, 1, 3}, 3, 30, 1);
        CHECK(all_pass(r));
        CHECK(r.front().claimed_rank == 4);
    }
    SUBCASE("(1,1,4), n = 4")
    {
        const RtPinConditions c = check_appendix_c_conditions({1, 1, 4}, 4);
        CHECK(c.t1 == 9);
        CHECK(c.t2 == 1);
        const auto r = verify_phase1_rtpin({1, 1, 4}, 4, 30, 1);
        CHECK(all_pass(r));
        CHECK(r.front().claimed_rank == 9);
    }
}

TEST_CASE("RT-PIN decodability conditions")
{
    const RtPinConditions c323 = check_appendix_c_conditions({3, 2, 3}, 3);
    CHECK(c323.equality_ok);
    CHECK(c323.inequality_ok);
    CHECK(c323.t1 == 8);
    CHECK(c323.t2 == 3);
    // 3 * 8 = 4 * 2 * 3, 24 <= 40.
    CHECK(4 * 2 * c323.t2 == 3 * c323.t1);
    CHECK(3 * c323.t1 <= 5 * (2 * 2 - 3) * c323.t1);

    for (int K = 3; K <= 8; ++K) {
        const RtPinConditions a = check_appendix_c_conditions({1, 1, K}, K);
        CHECK(a.equality_ok);
        CHECK(a.inequality_ok);
    }

    const RtPinConditions raw = check_appendix_c_conditions({3, 1, 3}, 3, false);
    CHECK_FALSE(raw.inequality_ok);
    const RtPinConditions capped = check_appendix_c_conditions({3, 1, 3}, 3, true);
    CHECK(capped.equality_ok);
    CHECK(capped.inequality_ok);
    CHECK(capped.effective_antennas == Rational(5, 3));
    CHECK(capped.t1 == 12);
    CHECK(capped.t2 == 5);

    CHECK_THROWS_AS(check_appendix_c_conditions({3, 2, 3}, 2), std::invalid_argument);
    CHECK_THROWS_AS(check_appendix_c_conditions({3, 2, 3}, 4), std::invalid_argument);
}

TEST_CASE("phase m on (3,2,3) and (1,1,3)")
{
    {
        const SystemConfig cfg{3, 2, 3};
        const ChannelRealization real = ChannelRealization::generate(cfg, 2, 4);
        RngStream rng(4, Stream::Precoder);
        const PhaseMBlock b = build_phase_m_block(cfg, 2, {0, 1}, 0, 1, 1, real, nullptr, rng);
        CHECK(b.slots == 2);
        CHECK(b.leader_streams == 6);
        CHECK(b.partner_streams == 1);
        CHECK(b.others == std::vector<int>{2});
        for (int k : {0, 1}) {
            const ComplexMatrix A = phase_m_decoding_stack(b, k);
            CHECK(A.rows() == 7);
            CHECK(A.cols() == 7);
            CHECK(numeric_rank(A) == 7);
            CHECK(numeric_rank(phase_m_inner_matrix(b, k)) == 6);
        }
        CHECK((b.F[2] * b.G_partner[2]).norm() < 1e-10);
        CHECK(b.F[2].rows() == 3);
    }
    {
        const SystemConfig cfg{1, 1, 3};
        const ChannelRealization real = ChannelRealization::generate(cfg, 2, 4);
        RngStream rng(4, Stream::Precoder);
        const PhaseMBlock b = build_phase_m_block(cfg, 2, {0, 1}, 0, 1, 1, real, nullptr, rng);
        CHECK(b.slots == 2);
        CHECK(b.leader_streams == 2);
        CHECK(b.partner_streams == 1);
    }
    CHECK(all_pass(verify_phase_m({3, 2, 3}, 2, 50, 1)));
    CHECK(all_pass(verify_phase_m({1, 1, 3}, 2, 50, 1)));
    CHECK(all_pass(verify_phase_m({4, 2, 4}, 3, 50, 1)));
    CHECK_THROWS_AS(verify_phase_m({3, 2, 3}, 3, 1, 1), std::invalid_argument);
}

TEST_CASE("phase m with a silent partner")
{
    // M = N t: the leader alone fills every receive dimension.
    for (const SystemConfig cfg : {SystemConfig{4, 2, 3}, SystemConfig{2, 1, 3}}) {
        const ChannelRealization real = ChannelRealization::generate(cfg, 2, 8);
        RngStream rng(8, Stream::Precoder);
        const PhaseMBlock b = build_phase_m_block(cfg, 2, {0, 1}, 0, 1, 1, real, nullptr, rng);
        CHECK(b.partner_streams == 0);
        CHECK(b.partner == -1);
        CHECK(b.F[2].rows() == b.F[2].cols());
        const auto r = verify_phase_m(cfg, 2, 50, 2);
        CHECK(all_pass(r));
    }
}

TEST_CASE("verification is deterministic and causal")
{
    CsitAudit audit;
    VerifyOptions opt;
    opt.audit = &audit;
    const auto a = verify_phase1_rtpin({3, 2, 3}, 3, 5, 77, opt);
    const auto b = verify_phase1_rtpin({3, 2, 3}, 3, 5, 77);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].min_to_max_singular_ratio == b[i].min_to_max_singular_ratio);
        CHECK(a[i].observed_rank == b[i].observed_rank);
    }
    verify_phase_m({3, 2, 3}, 2, 5, 77, opt);
    verify_phase1_mat({3, 2, 3}, 2, 5, 77, opt);
    CHECK(audit.granted() > 0);
    CHECK(audit.violations() == 0);

    const VerifySummary s = summarize("phase1-rtpin", {3, 2, 3}, 3, 5, 77, a);
    CHECK(s.all_pass());
    CHECK(s.trial_pass_count == 5);
    CHECK(s.min_singular_ratio_min > 0.0);
    CHECK(s.min_singular_ratio_min <= s.min_singular_ratio_median);
    CHECK(s.max_residual < 1e-10);
}
