import os
import sys

# Add src to python path to allow importing bellsim without installation
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

from bellsim.core import SimConfig
from bellsim.pipeline import AcceptanceSizes, run_acceptance


def main():
    print("=" * 70)
    print("   🌐 bellsim: 검증 파이프라인")
    print("      CHSH / 국소 폴리토프 / Horodecki / 필터 데모")
    print("      증인 / 상대 엔트로피 / 최소 확장 / 프로세스 대수")
    print("=" * 70)

    SimConfig.setup()
    full = "--full" in sys.argv[1:]
    sizes = AcceptanceSizes.full() if full else AcceptanceSizes()
    print(f"   모드: {'전체 크기' if full else '빠른 실행'}  (seed {SimConfig.SEED}, device {SimConfig.DEVICE})")

    df = run_acceptance(sizes, save_csv=True)

    print("\n" + "=" * 70)
    print(df[["criterion", "value", "passed", "seconds"]].to_string(index=False))
    print("=" * 70)
    sys.exit(0 if df["passed"].all() else 1)


if __name__ == "__main__":
    main()
