import sys

from .config import SimConfig


def echo(message: str, force: bool = False):
    """
    진행 상황 출력 (stdout은 JSON 결과용이므로 stderr로 보냄)

    :param message: 출력할 문자열
    :param force: True면 VERBOSE 설정과 무관하게 출력
    """
    if force or SimConfig.VERBOSE:
        print(message, file=sys.stderr)
