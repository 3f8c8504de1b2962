import json

from vlex_multipliers.exponent import ConstantExponent
from vlex_multipliers.oracle import discrete_consistency
from vlex_multipliers.pipelines import certify_c0_cloud
from vlex_multipliers.symbols import Symbol


OPTIONS = {
        "symbol": {
            "expr": "2/(1+x^2)",
            "name": "lorentzian",
            "wiener": {"constant": 0, "density": "exp(-abs(x))"},
        },
        "p": 3.0,
        "theta": 0.25,
        "epsilons": [0.5, 0.1],
    }

def certify(epsilon):
    a = Symbol.from_spec(OPTIONS["symbol"])
    p = ConstantExponent(OPTIONS["p"])
    certificate = certify_c0_cloud(a, p, theta=OPTIONS["theta"], epsilon=epsilon)
    print(f"epsilon {epsilon}: n0 = {certificate.stage_1.parameter:g}, "
          f"delta0 = {certificate.stage_2.parameter:g}, total = {certificate.certified_total:.6g}")

    replay = certificate.replay()
    honesty = certificate.honesty_check(a)
    row = discrete_consistency(a, certificate.approximant, certificate.certified_total, p)
    print(f"Replay ok: {replay.ok}, honest: {honesty.ok}, DFT model {row.lhs:.6g} <= {row.rhs:.6g}")
    return certificate

if __name__ == "__main__":
    for epsilon in OPTIONS["epsilons"]:
        certificate = certify(epsilon)
    print(json.dumps(certificate.to_dict()["constants"], indent=2))
    print("Ended")
