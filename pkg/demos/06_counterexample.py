"""Why no global two-norm stability estimate can hold.

The family f_lambda(x, y) = q(x, y) cos(lambda x) / lambda has function
norm decaying only like 1/lambda, while its line-integral data decays
super-polynomially (each extra oscillation cancels more of the
integral).  Any inequality ||f|| <= C ||R f||^theta would therefore
fail for large lambda.  The table below makes the two decay rates
visible; the log-log slopes of the data norm get steeper and steeper.
"""

from localradon.phantoms import smooth_bump
from localradon.stability import counterexample_experiment


def main():
    q = smooth_bump(center=(0.0, 0.5), width=0.4)
    lambdas = [10.0, 20.0, 40.0, 80.0]
    rows, slopes = counterexample_experiment(q, lambdas, tol=1e-9)

    print(f"{'lambda':>7} {'||f||_2':>12} {'lambda*||f||':>13} "
          f"{'||Rf||_2':>12}")
    for r in rows:
        print(f"{r['lambda']:>7.0f} {r['f_norm']:>12.4e} "
              f"{r['lambda'] * r['f_norm']:>13.4e} "
              f"{r['data_norm']:>12.4e}")

    print("\nsuccessive log-log slopes of ||Rf||_2 vs lambda:")
    for (l1, l2), s in zip(zip(lambdas, lambdas[1:]), slopes):
        print(f"  lambda {l1:.0f} -> {l2:.0f}: slope {s:+.3f}")
    print("slopes steepen monotonically and pass -3: no polynomial "
          "modulus of continuity can bridge the two norms.")


if __name__ == "__main__":
    main()
