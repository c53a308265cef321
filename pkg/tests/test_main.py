# © 2024 Carlos Manzanedo Rueda
# MIT License

import json
from unittest.mock import patch

import jsonschema
import pytest

import main
from reporting import CheckResult, RunReport


def run(capsys, *argv):
    code = main.main(list(argv))
    return code, capsys.readouterr().out


def test_parse_arguments_with_values(clean_env):
    args = main.parse_arguments([
        'verify', '--level', 'full', '--seed', '11', '--workers', '3',
        '--format', 'csv', '-o', 'report.csv', '--verbose',
    ])
    assert args.command == 'verify'
    assert args.level == 'full'
    assert args.seed == 11
    assert args.workers == 3
    assert args.format == 'csv'
    assert args.output == 'report.csv'
    assert args.verbose


def test_parse_arguments_grids(clean_env):
    args = main.parse_arguments(['mgf', '--z-grid=-0.2:0.2:5'])
    assert args.z_grid == [-0.2, -0.1, 0.0, 0.1, 0.2]
    args = main.parse_arguments(['fock-scan', '--N', '5,10', '--orders', '4'])
    assert args.Ns == [5, 10]
    assert args.orders == [4]


def test_parse_arguments_rejects_bad_input(clean_env):
    with pytest.raises(SystemExit) as exc:
        main.parse_arguments([])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main.parse_arguments(['enumerate', '--seq', '1,x'])
    with pytest.raises(SystemExit):
        main.parse_arguments(['mgf', '--z-grid', '0:1:0'])


def test_moments_recurrence_csv(clean_env, capsys):
    code, out = run(capsys, 'moments', '--order-max', '10')
    lines = out.splitlines()
    assert code == main.EXIT_OK
    assert lines[0] == ','.join(main.MOMENT_COLUMNS)
    assert len(lines) == 6
    assert lines[3].startswith('6,14,3,4.666666666666667,28,28')


def test_moments_default_table(clean_env, capsys):
    code, out = run(capsys, 'moments')
    assert code == main.EXIT_OK
    assert len(out.splitlines()) == 11


def test_moments_poly_matches_recurrence(clean_env, capsys):
    _, poly = run(capsys, 'moments', '--method', 'poly', '--order-max', '12', '--format', 'json')
    _, recurrence = run(capsys, 'moments', '--order-max', '12', '--format', 'json')
    fraction = lambda row: (row['numerator'], row['denominator'])
    assert ([fraction(r) for r in json.loads(poly)['rows']]
            == [fraction(r) for r in json.loads(recurrence)['rows']])


def test_moments_fock(clean_env, capsys, schema):
    code, out = run(capsys, 'moments', '--method', 'fock', '--N', '3', '--order-max', '4',
                    '--format', 'json')
    data = json.loads(out)
    jsonschema.validate(data, schema)
    assert code == main.EXIT_OK
    assert data['rows'][0]['decimal'] == 1.0
    # φ(ω(3)^4) = 2 - 1/3
    assert (data['rows'][1]['numerator'], data['rows'][1]['denominator']) == (5, 3)
    assert data['rows'][1]['extrapolated'] == pytest.approx(2.0)


def test_moments_enumerate_cap(clean_env, capsys):
    code, out = run(capsys, 'moments', '--method', 'enumerate', '--order-max', '18')
    assert code == main.EXIT_USAGE
    assert out == ''


def test_moments_enumerate_counts(clean_env, capsys):
    code, out = run(capsys, 'moments', '--method', 'enumerate', '--order-max', '6')
    assert code == main.EXIT_OK
    assert [line.split(',')[4] for line in out.splitlines()[1:]] == ['1', '4', '28']


def test_enumerate_adapted(clean_env, capsys, schema):
    code, out = run(capsys, 'enumerate', '--seq', '2,7,5,7,5,2')
    data = json.loads(out)
    jsonschema.validate(data, schema)
    assert code == main.EXIT_OK
    assert data['count'] == 5
    assert data['family'] == 'adapted/v-monotone'
    assert len(data['partitions']) == 5


def test_enumerate_ov2_csv(clean_env, capsys):
    code, out = run(capsys, 'enumerate', '--class', 'ov2', '--order', '4', '--format', 'csv')
    assert code == main.EXIT_OK
    assert out.splitlines()[0] == 'blocks,labels'
    assert len(out.splitlines()) == 5


def test_enumerate_ov2k(clean_env, capsys):
    code, out = run(capsys, 'enumerate', '--class', 'ov2k', '--order', '6', '--k', '4')
    assert code == main.EXIT_OK
    assert json.loads(out)['count'] == 28


def test_enumerate_missing_arguments(clean_env, capsys):
    assert run(capsys, 'enumerate')[0] == main.EXIT_USAGE
    assert run(capsys, 'enumerate', '--class', 'ov2')[0] == main.EXIT_USAGE
    assert run(capsys, 'enumerate', '--class', 'ov2k', '--order', '4')[0] == main.EXIT_USAGE


def test_universal_poly(clean_env, capsys, schema):
    code, out = run(capsys, 'universal-poly', '--seq', '1,2,1')
    data = json.loads(out)
    jsonschema.validate(data, schema)
    assert code == main.EXIT_OK
    assert data['terms'] == [{'vars': [[1, 3], [2]], 'coeff': 1}]


def test_universal_poly_rejects_equal_neighbours(clean_env, capsys):
    assert run(capsys, 'universal-poly', '--seq', '1,1,2')[0] == main.EXIT_USAGE


def test_mgf_rows(clean_env, capsys):
    code, out = run(capsys, 'mgf', '--z-grid', '0,0.1,0.6')
    lines = out.splitlines()
    assert code == main.EXIT_OK
    assert lines[0] == ','.join(main.MGF_COLUMNS)
    assert lines[1] == '0.0,1.0,,'
    z, value, residual, error = lines[2].split(',')
    assert float(value) > 1.0
    assert abs(float(residual)) < 1e-8
    assert error == ''
    assert lines[3].startswith('0.6,,,')


def test_fock_scan_json(clean_env, capsys, schema):
    code, out = run(capsys, 'fock-scan', '--N', '10,20', '--orders', '2,4', '--format', 'json')
    data = json.loads(out)
    jsonschema.validate(data, schema)
    assert code == main.EXIT_OK
    assert len(data['rows']) == 4
    assert data['rows'][2]['error'] == pytest.approx(0.1)


def test_fock_scan_rejects_bad_N(clean_env, capsys):
    assert run(capsys, 'fock-scan', '--N', '0,10')[0] == main.EXIT_USAGE


def test_verify_exit_codes(clean_env, capsys):
    failing = RunReport(command='verify', level='fast', seed=1, checks=[
        CheckResult(name='broken', passed=False, expected='1', actual='2'),
    ])
    with patch('main.run_verification', return_value=failing):
        code, out = run(capsys, 'verify', '--format', 'csv')
    assert code == main.EXIT_CHECK_FAILED
    assert out.splitlines()[1].startswith('broken,False,1,2')

    passing = RunReport(command='verify', level='fast', seed=1,
                        checks=[CheckResult(name='ok', passed=True)])
    with patch('main.run_verification', return_value=passing):
        code, out = run(capsys, 'verify')
    assert code == main.EXIT_OK
    assert json.loads(out)['kind'] == 'run-report'


def test_output_file(clean_env, capsys, tmp_path):
    target = tmp_path / 'moments.csv'
    code, out = run(capsys, 'moments', '--order-max', '4', '-o', str(target))
    assert code == main.EXIT_OK
    assert out == ''
    assert target.read_text(encoding='utf-8').splitlines()[0].startswith('order,')
