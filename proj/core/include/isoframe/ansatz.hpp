#pragma once

#include <map>
#include <vector>

#include "isoframe/iso_bundle.hpp"

namespace isoframe {

// Named one-variable profiles backing a symmetric ansatz, with the reduced
// variable's range.
struct ProfileSet {
    std::map<std::string, Profile> items;
    Interval domain{0.5, 3.0};

    const Profile& get(const std::string& name) const;
    bool has(const std::string& name) const { return items.count(name) != 0; }
    void add(Profile p) { items[p.name] = std::move(p); }
};

// Profile from closed-form callbacks.
Profile make_profile(std::string name, std::function<double(double)> f,
                     std::function<double(double)> d1, std::function<double(double)> d2);

// Profile from a parsed expression in the variable `var`.
Profile expression_profile(std::string name, const std::string& text, const std::string& var = "u");

enum class AnsatzKind { Spherical, PlaneWave, SphericalWave };

struct AnsatzFrame {
    IsoFrame frame;
    AnsatzKind kind;
    ProfileSet profiles;
    double psi = 0.0;
};

// pi^1 = -P dt^dr + Q r^2 sin(theta) dtheta^dphi
// pi^2 = -p dt^dtheta - q sin(theta) dr^dphi
// pi^3 =  p sin(theta) dt^dphi - q dr^dtheta
AnsatzFrame build_spherical(const ProfileSet& profiles, double m);

// pi^1 = P dT^dZ - Q rho drho^dphi
// pi^2 = p dZ^drho + q rho dT^dphi
// pi^3 = p rho dphi^dZ + q dT^drho
AnsatzFrame build_plane_wave(const ProfileSet& profiles, double psi, double m);

// pi^1 = p z dz^de - q z^2 sinh^2(e) sin(th) dth^dph
// pi^2 = p z sinh(e) dz^dth + q z^2 sinh(e) sin(th) de^dph
// pi^3 = p z sinh(e) sin(th) dz^dph + q z^2 sinh(e) dth^de     (z=zeta, e=eta; m=1)
AnsatzFrame build_spherical_wave(const ProfileSet& profiles);

// Closed-form connection families, used as independent inputs for identity
// checks (the frame pipeline always derives its connection from the solve).
IsoTripletForm spherical_connection(const Profile& Phi, const Profile& A);   // alpha^1 = Phi dt - cos dphi, ...
IsoTripletForm plane_wave_connection(const Profile& f, const Profile& g);    // alpha^1 = f dZ - dphi, ...
IsoTripletForm cone_connection(const Profile& A);

struct ReducedResidual {
    std::string label; // iso index + component slot
    std::function<double(double)> value; // function of the reduced variable
};

// Field-equation residuals of the full pipeline restricted to the symmetry
// orbit, divided by each slot's geometric weight and checked to be
// angle-independent (<= 1e-10 against three orbit configurations).
std::vector<ReducedResidual> reduced_residuals(const AnsatzFrame& ansatz);

// The four spherical structure-equation relations evaluated at radius r:
//   (r^2 Q)' - 2 A q,   p' - (A P - Phi q),   (r^2 P)' - 2 A p,   q' - (A Q + Phi p)
// with A and Phi taken from the supplied profile set.
std::array<double, 4> spherical_structure_relations(const ProfileSet& profiles, double m, double r);

} // namespace isoframe
