#!/usr/bin/env python3
"""The full NIZK argument of knowledge for QMA, end to end.

Runs setup, proving, verification through the exact threshold measurement,
post-verified extraction of the witness, and the zero-knowledge simulator,
on the 12-physical-qubit reference configuration.
"""

import numpy as np

from qmalab import permver, protocol, zxham
from qmalab.obfstack import QPrOSim
from qmalab.protocol import GammaParams, ProtocolConfig
from qmalab.zxham import HamTerm, HamiltonianInstance

h = HamiltonianInstance(2, (HamTerm(0, 1, "Z", 0, 0.5), HamTerm(0, 1, "X", 1, 0.5)))
energy, witness = zxham.ground_state(h)
cfg = ProtocolConfig()  # ell=2, k=2, lambda_code=1, ideal backend
gammas = GammaParams(gamma=0.2, p_margin=0.1)
pv = permver.build(h, cfg.k)
print("instance: frustration-free single-pair ZX Hamiltonian, ground energy", round(energy, 9))
print(f"configuration: {pv.list_len} witness registers x {pv.ell} qubits x 3 physical -> "
      f"{pv.list_len * pv.ell * 3} physical qubits")

rng = np.random.default_rng(1234)
qpro = QPrOSim.from_seed(rng)

print("\n== honest run with extraction-mode setup ==")
crs, trapdoor = protocol.ext0(rng, cfg)
proof = protocol.prove(crs, h, witness, cfg, qpro, rng)
print("proof transcript: ", len(str(proof.to_json())), "bytes of classical data +",
      proof.encoded.num_qubits, "encoded qubits")

accept, residual, info = protocol.verify(crs, gammas, h, proof, cfg, qpro, rng)
print("verifier accepts:", bool(accept),
      " measured mixture eigenvalue:", round(info["eigenvalue_measured"], 9))

extracted = protocol.ext1(gammas, crs, trapdoor, h, residual, cfg, qpro)
quality = protocol.per_copy_acceptance(h, extracted, pv.list_len)
print("extracted witness per-copy acceptance:", round(quality, 9), f"(target >= {1 - gammas.gamma})")

print("\n== zero-knowledge simulator (no witness input) ==")
sim_crs, sim_td, sim_proof = protocol.simulate(h, cfg, qpro, rng)
sim_accept, sim_residual, _ = protocol.verify(sim_crs, gammas, h, sim_proof, cfg, qpro, rng)
print("simulated proof verifies:", bool(sim_accept))
sim_state = protocol.ext1(gammas, sim_crs, sim_td, h, sim_residual, cfg, qpro)
print("simulated proof decodes to |0...0> with probability",
      round(abs(sim_state.amplitudes[0]) ** 2, 9))

print("\n== a forged proof: honest transcript, garbage quantum state ==")
from qmalab.simstate import StateVector

garbage = StateVector.from_amplitudes(np.ones(2**12) / 2**6)
fake = protocol.QmaProof(garbage, proof.obf)
rej, _, info2 = protocol.verify(crs, gammas, h, fake, cfg, qpro, rng)
print("verifier accepts the forgery:", bool(rej),
      " (mixture expectation", round(info2["mixture_expectation"], 4), ")")
