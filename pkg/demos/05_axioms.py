"""Check a derivation and fuzz the axioms for soundness."""

from xpd.axioms import BUNDLED_PROOF, check_script, fuzz_soundness

print(BUNDLED_PROOF)
print("verdict:", check_script(BUNDLED_PROOF))

broken = BUNDLED_PROOF.replace("3. trans 1 2\n", "")
print("without the last step:", check_script(broken))

report = fuzz_soundness("full", ["a", "b"], trees=50, seed=1)
print(f"\nfuzzed {sum(report.instances.values())} instances of {len(report.instances)} schemes:",
      "no counterexamples" if report.ok else "COUNTEREXAMPLES FOUND")
