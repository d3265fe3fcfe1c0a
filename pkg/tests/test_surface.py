# -*- coding: utf-8 -*-

import json

import pytest

import exforge as exf


def test_fixture_surface_loads(surface):
    assert surface.prefix == 'az'
    assert surface.version == '2.40.0'
    assert len(surface) == 20
    vm_create = surface.lookup('vm create')
    assert vm_create.parameter_names == ('image', 'admin-username', 'name',
                                         'ssh-key-value', 'resource-group',
                                         'location', 'size')
    assert vm_create.parameter('resource-group').required
    assert vm_create.group == 'vm'


def test_lookup_normalizes_whitespace(surface):
    assert exf.lookup_command(surface, '  vm   create ').name == 'vm create'
    assert 'keyvault  update' in surface
    assert exf.lookup_command(surface, 'vm frobnicate') is None


def test_resolve_parameter_aliases(surface):
    spec = surface.lookup('vm create')
    assert spec.resolve_parameter('-g') == 'resource-group'
    assert spec.resolve_parameter('--ssh-key-values') == 'ssh-key-value'
    assert spec.resolve_parameter('--name') == 'name'
    assert spec.resolve_parameter('--nope') is None


def test_labeled_types_parse(surface):
    spec = surface.lookup('network vnet create')
    assert spec.parameter('address-prefix').labeled_type is exf.ParamType.IPAddress


def test_surface_round_trip(surface, tmp_path):
    path = str(tmp_path / 'surface.json')
    exf.write_surface(surface, path)
    assert exf.load_surface(path) == surface


def _write(tmp_path, data):
    path = tmp_path / 'surface.json'
    path.write_text(json.dumps(data))
    return str(path)


def test_duplicate_command_names_entity(tmp_path):
    data = {'prefix': 'az', 'commands': [{'name': 'vm create'},
                                         {'name': 'vm  create'}]}
    with pytest.raises(exf.ValidationError, match = 'duplicate command "vm create"'):
        exf.load_surface(_write(tmp_path, data))


def test_duplicate_alias_within_command(tmp_path):
    data = {'prefix': 'az', 'commands': [{'name': 'vm show', 'parameters': [
        {'name': 'name', 'aliases': ['n']},
        {'name': 'nic', 'aliases': ['n']}]}]}
    with pytest.raises(exf.ValidationError, match = 'duplicate parameter "n"'):
        exf.load_surface(_write(tmp_path, data))


def test_empty_prefix_rejected(tmp_path):
    with pytest.raises(exf.ValidationError, match = 'prefix'):
        exf.load_surface(_write(tmp_path, {'prefix': ' ', 'commands': []}))


def test_unknown_labeled_type_rejected(tmp_path):
    data = {'prefix': 'az', 'commands': [{'name': 'vm show', 'parameters': [
        {'name': 'name', 'labeled_type': 'Colour'}]}]}
    with pytest.raises(exf.ValidationError, match = 'vm show'):
        exf.load_surface(_write(tmp_path, data))


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(exf.InputError):
        exf.load_surface(str(tmp_path / 'missing.json'))
    path = tmp_path / 'broken.json'
    path.write_text('{"prefix": ')
    with pytest.raises(exf.ValidationError):
        exf.load_surface(str(path))


def test_param_type_order_and_parse():
    names = [t.value for t in exf.ParamType]
    assert len(names) == 15
    assert names[0] == 'String'
    assert names[-1] == 'PermissionFormats'
    assert exf.ParamType.parse('IPAddress') is exf.ParamType.IPAddress
    assert len(exf.NON_STRING_TYPES) == 14
    with pytest.raises(ValueError):
        exf.ParamType.parse('Colour')
