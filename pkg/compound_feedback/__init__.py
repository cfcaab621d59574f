# -*- coding: utf-8 -*-

# /***************************************************************************
#  compound_feedback
#                                  A Python package
#  Opportunistic variable-rate feedback coding over finite compound channels
#                               -------------------
#  ***************************************************************************/

# /***************************************************************************
#  *                                                                         *
#  *   This program is free software; you can redistribute it and/or modify  *
#  *   it under the terms of the GNU General Public License as published by  *
#  *   the Free Software Foundation; either version 2 of the License, or     *
#  *   (at your option) any later version.                                   *
#  *                                                                         *
#  ***************************************************************************/
#  This module makes the package metadata known to its users.

__revision__ = '$Format:%H$'

import os
import configparser


def read_metadata():
    """Reads the [general] section of the bundled metadata.txt.

    Returns:
        dict: Metadata keys mapped to their string values
    """
    file_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'metadata.txt')
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read(file_path, encoding='utf-8')
    if not parser.has_section('general'):
        return {}
    return dict(parser.items('general'))


__version__ = read_metadata().get('version', '0.0')
