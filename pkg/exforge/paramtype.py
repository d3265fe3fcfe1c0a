# -*- coding: utf-8 -*-
"""
Parameter type taxonomy.

Fifteen categories describing the kind of value a command line
parameter accepts. Serialized names are stable and are the ones used in
surface files, labeled data and saved models.

"""

from enum import Enum


class ParamType(Enum):
    """
    ParamType

    Closed set of parameter value categories. Declaration order is the
    label order used to break ties between equally likely predictions.

    Example
    -------
    >>> import exforge as exf
    >>> exf.ParamType.parse('IPAddress')
    <ParamType.IPAddress: 'IPAddress'>

    """

    String = 'String'
    Enum = 'Enum'
    Integer = 'Integer'
    GUID = 'GUID'
    FolderFilePath = 'FolderFilePath'
    CommandSpecificUnknown = 'CommandSpecificUnknown'
    IPAddress = 'IPAddress'
    UrlEmail = 'UrlEmail'
    BuildInfo = 'BuildInfo'
    QuotedStrings = 'QuotedStrings'
    Version = 'Version'
    TimeDuration = 'TimeDuration'
    KeysTokens = 'KeysTokens'
    IntWithSpecificFormat = 'IntWithSpecificFormat'
    PermissionFormats = 'PermissionFormats'

    @classmethod
    def parse(cls, name):
        """
        Returns the category for a serialized name.

        Parameters
        ----------
        name : str or ParamType
            serialized category name

        Raises
        ------
        ValueError
            If name is not one of the fifteen categories

        """

        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip())
        except ValueError:
            raise ValueError('%s is not a valid parameter type' % name)

    @classmethod
    def order(cls, name):
        """Position of a category in label order."""
        return list(cls).index(cls.parse(name))


NON_STRING_TYPES = tuple(t for t in ParamType if t is not ParamType.String)
