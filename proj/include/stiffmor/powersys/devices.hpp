// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file devices.hpp
///
/// Generating units attached to a bus: grid-forming and grid-following
/// converters with droop, virtual impedance, cascaded voltage/current control
/// and LCL output stage, and a 14th-order synchronous generator with TGOV1,
/// SEXS and PSS1A.
///
/// Every unit sees its bus voltage v (network frame) and the frame speed, and
/// returns its state derivatives, the current it injects into the bus
/// (network frame) and its own electrical speed. Equations are templated on
/// the scalar type; Jacobians come from forward-mode automatic
/// differentiation of the same code.
///
#ifndef STIFFMOR_POWERSYS_DEVICES_HPP
#define STIFFMOR_POWERSYS_DEVICES_HPP

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stiffmor/common.hpp"
#include "stiffmor/powersys/config.hpp"

namespace stiffmor::powersys
{

/// 2-vector helpers; J is the 90-degree rotation [[0, -1], [1, 0]].
template <typename T>
struct V2
{
    T d, q;
};

template <typename T>
V2<T> rot90(const V2<T>& a)
{
    return {-a.q, a.d};
}

/// R(angle) a
template <typename T, typename C>
V2<T> rotate(const V2<T>& a, const C& c, const C& s)
{
    return {c * a.d - s * a.q, s * a.d + c * a.q};
}

/// (p, q) delivered through current i at voltage v: p = v . i, q = v^T J i.
template <typename T>
std::pair<T, T> instantaneous_power(const V2<T>& v, const V2<T>& i)
{
    return {v.d * i.d + v.q * i.q, v.q * i.d - v.d * i.q};
}

struct DeviceJacobian
{
    Mat fx, fu, fv;   ///< df/d(x, u, v)
    Vec fw;           ///< df/d(frame speed)
    Mat ix, iu, iv;   ///< d(injection)/d(x, u, v), 2 rows
    Vec wx, wu, wv;   ///< d(speed)/d(x, u, v)
};

//
// Runtime interface used by the network model.
//
class Device
{
public:
    virtual ~Device() = default;

    int bus() const { return bus_; }
    bool angle_pinned() const { return pinned_; }
    void pin_angle(bool on) { pinned_ = on; }

    /// States of the full unit model (angle included).
    virtual Index full_states() const = 0;
    Index nx() const { return full_states() - (pinned_ ? 1 : 0); }
    virtual Index nu() const = 0;
    virtual std::string kind() const = 0;
    virtual std::vector<Label> full_state_labels() const = 0;
    virtual std::vector<Label> input_labels() const = 0;

    std::vector<Label> state_labels() const
    {
        auto l = full_state_labels();
        if (pinned_)
            l.erase(l.begin());
        return l;
    }

    /// f (nx), injected current (2) and speed for stored states x (length nx()).
    virtual void eval(const double* x, const double* u, double vd, double vq, double w_frame,
                      double* f, double* inj, double& speed) const = 0;

    virtual void jacobian(const double* x, const double* u, double vd, double vq, double w_frame,
                          DeviceJacobian& jac) const = 0;

    /// Steady-state unit states and setpoints for a given bus voltage and
    /// injected current (network frame), frame speed 1. Returns the full
    /// state vector, angle first.
    virtual void initialize(const V2<double>& v, const V2<double>& i, Vec& x_full,
                            Vec& u) const = 0;

    std::string name() const { return kind() + std::to_string(bus_); }

protected:
    explicit Device(int bus) : bus_(bus) {}

private:
    int bus_;
    bool pinned_ = false;
};

//
// CRTP glue: Derived provides
//   static constexpr int kStates, kInputs;
//   template <class T> void dynamics(const T* x_full, const T* u, V2<T> v, T w_frame,
//                                    T* f_full, V2<T>& inj, T& speed) const;
//
template <typename Derived>
class DeviceImpl : public Device
{
public:
    using Device::Device;

    Index full_states() const override { return Derived::kStates; }
    Index nu() const override { return Derived::kInputs; }

    void eval(const double* x, const double* u, double vd, double vq, double w_frame, double* f,
              double* inj, double& speed) const override
    {
        std::array<double, Derived::kStates> xf{}, ff{};
        expand(x, xf.data());
        V2<double> i{};
        self().dynamics(xf.data(), u, V2<double>{vd, vq}, w_frame, ff.data(), i, speed);
        compress(ff.data(), f);
        inj[0] = i.d;
        inj[1] = i.q;
    }

    // Forward-mode AD of dynamics(); defined in device_jacobian.hpp and
    // compiled once for every unit type.
    void jacobian(const double* x, const double* u, double vd, double vq, double w_frame,
                  DeviceJacobian& jac) const override;

    /// Residual of the full model with the angle included (test hook).
    void eval_full(const double* x_full, const double* u, double vd, double vq, double w_frame,
                   double* f_full, double* inj, double& speed) const
    {
        V2<double> i{};
        self().dynamics(x_full, u, V2<double>{vd, vq}, w_frame, f_full, i, speed);
        inj[0] = i.d;
        inj[1] = i.q;
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }

    // A pinned angle is held at zero: the network is rotated so that the
    // reference unit sits at angle 0.
    void expand(const double* x, double* xf) const
    {
        const int off = angle_pinned() ? 1 : 0;
        if (off)
            xf[0] = 0.0;
        for (int k = off; k < Derived::kStates; ++k)
            xf[k] = x[k - off];
    }

    void compress(const double* ff, double* f) const
    {
        const int off = angle_pinned() ? 1 : 0;
        for (int k = off; k < Derived::kStates; ++k)
            f[k - off] = ff[k];
    }
};

//
// Converter in its own dq frame at angle theta_c rotating with omega_c.
// States: theta_c, omega~, v~, xi(2), gamma(2), i_f(2), v_f(2), i_g(2)
// [, eps, theta_s for grid-following]. Inputs: p*, q*, V*.
//
template <ConverterMode Mode>
class Converter : public DeviceImpl<Converter<Mode>>
{
public:
    static constexpr bool kGfl = Mode == ConverterMode::grid_following;
    static constexpr int kStates = kGfl ? 15 : 13;
    static constexpr int kInputs = 3;

    Converter(int bus, const ConverterParams& p, double omega_b)
        : DeviceImpl<Converter<Mode>>(bus), p_(p), wb_(omega_b)
    {
    }

    std::string kind() const override { return kGfl ? "gfl" : "gfm"; }
    const ConverterParams& params() const { return p_; }

    std::vector<Label> full_state_labels() const override
    {
        const std::string n = this->name() + ".";
        std::vector<Label> l = {{n + "theta_c", "rad"}, {n + "omega_t", "pu"}, {n + "v_t", "pu"},
                                {n + "xi_d", "pu"},     {n + "xi_q", "pu"},    {n + "gamma_d", "pu"},
                                {n + "gamma_q", "pu"},  {n + "i_f_d", "pu"},   {n + "i_f_q", "pu"},
                                {n + "v_f_d", "pu"},    {n + "v_f_q", "pu"},   {n + "i_g_d", "pu"},
                                {n + "i_g_q", "pu"}};
        if (kGfl)
        {
            l.push_back({n + "eps", "pu"});
            l.push_back({n + "theta_s", "rad"});
        }
        return l;
    }

    std::vector<Label> input_labels() const override
    {
        const std::string n = this->name() + ".";
        return {{n + "p_set", "pu"}, {n + "q_set", "pu"}, {n + "v_set", "pu"}};
    }

    template <typename T>
    void dynamics(const T* x, const T* u, const V2<T>& vbus, const T& w_frame, T* f, V2<T>& inj,
                  T& speed) const
    {
        using std::cos;
        using std::sin;
        const T& theta = x[0];
        const T& w_t = x[1];
        const T& v_t = x[2];
        const V2<T> xi{x[3], x[4]}, ga{x[5], x[6]}, i_f{x[7], x[8]}, v_f{x[9], x[10]},
            i_g{x[11], x[12]};
        const T c = cos(theta), s = sin(theta);
        const V2<T> vb{c * vbus.d + s * vbus.q, -s * vbus.d + c * vbus.q};

        const auto [p, q] = instantaneous_power(v_f, i_g);

        T w_s = T(1.0);
        T v_pll_q = T(0.0);
        if constexpr (kGfl)
        {
            const T a = theta - x[14];
            v_pll_q = sin(a) * v_f.d + cos(a) * v_f.q;
            w_s = 1.0 + p_.K_Ps * v_pll_q + p_.K_Is * x[13];
        }
        const T w_c = w_s + w_t;

        f[0] = wb_ * (w_c - w_frame);
        f[1] = -p_.omega_z * w_t + p_.R_p * p_.omega_z * (u[0] - p);
        f[2] = -p_.omega_z * v_t + p_.R_q * p_.omega_z * (u[1] - q);

        const V2<T> v_c{u[2] + v_t, T(0.0)};
        const V2<T> jig = rot90(i_g), jvf = rot90(v_f), jif = rot90(i_f);
        const V2<T> vf_ref{v_c.d - p_.r_v * i_g.d - w_c * p_.l_v * jig.d,
                           v_c.q - p_.r_v * i_g.q - w_c * p_.l_v * jig.q};
        f[3] = vf_ref.d - v_f.d;
        f[4] = vf_ref.q - v_f.q;
        const V2<T> if_ref{p_.K_Pv * (vf_ref.d - v_f.d) + p_.K_Iv * xi.d + p_.K_Fv * i_g.d +
                               w_c * p_.c_f * jvf.d,
                           p_.K_Pv * (vf_ref.q - v_f.q) + p_.K_Iv * xi.q + p_.K_Fv * i_g.q +
                               w_c * p_.c_f * jvf.q};
        f[5] = if_ref.d - i_f.d;
        f[6] = if_ref.q - i_f.q;
        const V2<T> v_sw{p_.K_Pi * (if_ref.d - i_f.d) + p_.K_Ii * ga.d + p_.K_Fi * v_f.d +
                             w_c * p_.l_f * jif.d,
                         p_.K_Pi * (if_ref.q - i_f.q) + p_.K_Ii * ga.q + p_.K_Fi * v_f.q +
                             w_c * p_.l_f * jif.q};

        const double kf = wb_ / p_.l_f, kc = wb_ / p_.c_f, kt = wb_ / p_.l_t;
        f[7] = kf * (v_sw.d - v_f.d) - kf * p_.r_f * i_f.d - wb_ * w_c * jif.d;
        f[8] = kf * (v_sw.q - v_f.q) - kf * p_.r_f * i_f.q - wb_ * w_c * jif.q;
        f[9] = kc * (i_f.d - i_g.d) - wb_ * w_c * jvf.d;
        f[10] = kc * (i_f.q - i_g.q) - wb_ * w_c * jvf.q;
        f[11] = kt * (v_f.d - vb.d) - kt * p_.r_t * i_g.d - wb_ * w_c * jig.d;
        f[12] = kt * (v_f.q - vb.q) - kt * p_.r_t * i_g.q - wb_ * w_c * jig.q;
        if constexpr (kGfl)
        {
            f[13] = v_pll_q;
            f[14] = wb_ * (w_s - w_frame);
        }
        inj = rotate(i_g, c, s);
        speed = w_c;
    }

    void initialize(const V2<double>& v, const V2<double>& i, Vec& x, Vec& u) const override
    {
        using C = std::complex<double>;
        const C vb(v.d, v.q), ig(i.d, i.q), j(0.0, 1.0);
        const C vf = vb + C(p_.r_t, p_.l_t) * ig;
        const C if_ = ig + j * p_.c_f * vf;
        const C vsw = vf + C(p_.r_f, p_.l_f) * if_;
        const C vc = vf + C(p_.r_v, p_.l_v) * ig;
        const double theta = std::arg(vc);
        const C rot = std::polar(1.0, -theta);
        const C vf_l = vf * rot, ig_l = ig * rot, if_l = if_ * rot, vsw_l = vsw * rot;
        const C xi = (if_l - p_.K_Fv * ig_l - j * p_.c_f * vf_l) / p_.K_Iv;
        const C ga = (vsw_l - p_.K_Fi * vf_l - j * p_.l_f * if_l) / p_.K_Ii;
        x.setZero(kStates);
        x << theta, 0.0, 0.0, xi.real(), xi.imag(), ga.real(), ga.imag(), if_l.real(),
            if_l.imag(), vf_l.real(), vf_l.imag(), ig_l.real(), ig_l.imag(),
            Vec::Zero(kStates - 13);
        if constexpr (kGfl)
            x(14) = std::arg(vf);
        const double p = vf_l.real() * ig_l.real() + vf_l.imag() * ig_l.imag();
        const double q = vf_l.imag() * ig_l.real() - vf_l.real() * ig_l.imag();
        u.resize(3);
        u << p, q, std::abs(vc);
    }

private:
    ConverterParams p_;
    double wb_;
};

using GridFormingConverter = Converter<ConverterMode::grid_forming>;
using GridFollowingConverter = Converter<ConverterMode::grid_following>;

//
// Round-rotor synchronous generator, generator convention, rotor frame with
// the d axis at angle theta_r. States: theta_r, omega, psi_d, psi_q, psi_fd,
// psi_1d, psi_1q, psi_2q, TGOV1 (x_g1, x_g2), SEXS (x_e, E_fd), PSS1A
// (x_w, x_p). Inputs: P_ref, V_ref.
//
class SyncGen : public DeviceImpl<SyncGen>
{
public:
    static constexpr int kStates = 14;
    static constexpr int kInputs = 2;

    SyncGen(int bus, const SyncGenParams& p, double omega_b)
        : DeviceImpl<SyncGen>(bus), p_(p), wb_(omega_b)
    {
        ra_ = p_.R_a + p_.r_t;
        const double ll = p_.L_l + p_.l_t;
        Eigen::Matrix3d ld, lq;
        ld << p_.L_ad + ll, p_.L_ad, p_.L_ad, p_.L_ad, p_.L_ad + p_.L_fd, p_.L_ad, p_.L_ad, p_.L_ad,
            p_.L_ad + p_.L_1d;
        lq << p_.L_aq + ll, p_.L_aq, p_.L_aq, p_.L_aq, p_.L_aq + p_.L_1q, p_.L_aq, p_.L_aq, p_.L_aq,
            p_.L_aq + p_.L_2q;
        ld_ = ld;
        lq_ = lq;
        ldinv_ = ld.inverse();
        lqinv_ = lq.inverse();
    }

    std::string kind() const override { return "sg"; }
    const SyncGenParams& params() const { return p_; }

    std::vector<Label> full_state_labels() const override
    {
        const std::string n = name() + ".";
        return {{n + "theta_r", "rad"}, {n + "omega", "pu"},  {n + "psi_d", "pu"},
                {n + "psi_q", "pu"},    {n + "psi_fd", "pu"}, {n + "psi_1d", "pu"},
                {n + "psi_1q", "pu"},   {n + "psi_2q", "pu"}, {n + "x_g1", "pu"},
                {n + "x_g2", "pu"},     {n + "x_e", "pu"},    {n + "E_fd", "pu"},
                {n + "x_w", "pu"},      {n + "x_p", "pu"}};
    }

    std::vector<Label> input_labels() const override
    {
        const std::string n = name() + ".";
        return {{n + "P_ref", "pu"}, {n + "V_ref", "pu"}};
    }

    template <typename T>
    void dynamics(const T* x, const T* u, const V2<T>& vbus, const T& w_frame, T* f, V2<T>& inj,
                  T& speed) const
    {
        using std::cos;
        using std::sin;
        using std::sqrt;
        const T& theta = x[0];
        const T& w = x[1];
        const T c = cos(theta), s = sin(theta);
        const T e_d = c * vbus.d + s * vbus.q;
        const T e_q = -s * vbus.d + c * vbus.q;

        // [-i_d, i_fd, i_1d] = Ld^{-1} [psi_d, psi_fd, psi_1d]; same for q.
        std::array<T, 3> cd, cq;
        for (int r = 0; r < 3; ++r)
        {
            cd[static_cast<std::size_t>(r)] =
                ldinv_(r, 0) * x[2] + ldinv_(r, 1) * x[4] + ldinv_(r, 2) * x[5];
            cq[static_cast<std::size_t>(r)] =
                lqinv_(r, 0) * x[3] + lqinv_(r, 1) * x[6] + lqinv_(r, 2) * x[7];
        }
        const T i_d = -cd[0], i_fd = cd[1], i_1d = cd[2];
        const T i_q = -cq[0], i_1q = cq[1], i_2q = cq[2];

        f[2] = wb_ * (e_d + ra_ * i_d + w * x[3]);
        f[3] = wb_ * (e_q + ra_ * i_q - w * x[2]);
        f[4] = wb_ * (p_.R_fd / p_.L_ad * x[11] - p_.R_fd * i_fd);
        f[5] = -wb_ * p_.R_1d * i_1d;
        f[6] = -wb_ * p_.R_1q * i_1q;
        f[7] = -wb_ * p_.R_2q * i_2q;

        const T dw = w - 1.0;
        const T t_e = x[2] * i_q - x[3] * i_d;
        f[8] = (u[0] - dw / p_.R_gov - x[8]) / p_.T_1;
        f[9] = (x[8] - x[9]) / p_.T_3;
        const T p_m = x[9] + (p_.T_2 / p_.T_3) * (x[8] - x[9]) - p_.D_t * dw;
        f[1] = (p_m / w - t_e - p_.D * dw) / (2.0 * p_.H);
        f[0] = wb_ * (w - w_frame);

        const T y_w = p_.K_s * dw - x[12];
        f[12] = y_w / p_.T_w;
        f[13] = (y_w - x[13]) / p_.T_2p;
        const T v_pss = x[13] + (p_.T_1p / p_.T_2p) * (y_w - x[13]);
        const T vmag = sqrt(vbus.d * vbus.d + vbus.q * vbus.q);
        const T u_e = u[1] - vmag + v_pss;
        f[10] = (u_e - x[10]) / p_.T_b;
        const T y = x[10] + (p_.T_a / p_.T_b) * (u_e - x[10]);
        f[11] = (p_.K_a * y - x[11]) / p_.T_e;

        inj = rotate(V2<T>{i_d, i_q}, c, s);
        speed = w;
    }

    void initialize(const V2<double>& v, const V2<double>& i, Vec& x, Vec& u) const override
    {
        using C = std::complex<double>;
        const C vb(v.d, v.q), ib(i.d, i.q);
        const double lq = p_.L_aq + p_.L_l + p_.l_t, ldp = p_.L_ad + p_.L_l + p_.l_t;
        const C e = vb + C(ra_, lq) * ib;
        const double theta = std::arg(e) - 0.5 * std::numbers::pi;
        const C rot = std::polar(1.0, -theta);
        const C er = vb * rot, ir = ib * rot;
        const double e_d = er.real(), e_q = er.imag(), i_d = ir.real(), i_q = ir.imag();
        const double psi_d = e_q + ra_ * i_q;
        const double psi_q = -(e_d + ra_ * i_d);
        const double i_fd = (psi_d + ldp * i_d) / p_.L_ad;
        const double psi_fd = -p_.L_ad * i_d + (p_.L_ad + p_.L_fd) * i_fd;
        const double psi_1d = -p_.L_ad * i_d + p_.L_ad * i_fd;
        const double psi_1q = -p_.L_aq * i_q;
        const double psi_2q = -p_.L_aq * i_q;
        const double e_fd = p_.L_ad * i_fd;
        const double t_e = psi_d * i_q - psi_q * i_d;
        x.resize(kStates);
        x << theta, 1.0, psi_d, psi_q, psi_fd, psi_1d, psi_1q, psi_2q, t_e, t_e, e_fd / p_.K_a,
            e_fd, 0.0, 0.0;
        u.resize(2);
        u << t_e, std::abs(vb) + e_fd / p_.K_a;
    }

private:
    SyncGenParams p_;
    double wb_;
    double ra_;
    Eigen::Matrix3d ld_, lq_, ldinv_, lqinv_;
};

} // namespace stiffmor::powersys

#endif
