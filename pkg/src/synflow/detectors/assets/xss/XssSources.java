import java.io.BufferedReader;
import javax.servlet.http.Cookie;
import javax.servlet.http.HttpServletRequest;

class XssSources {
  void sources(HttpServletRequest request, BufferedReader reader) throws Exception {
    String a = request.getParameter("name");
    String b = request.getQueryString();
    String c = request.getHeader("Referer");
    Cookie[] cookies = request.getCookies();
    String d = cookies[0].getValue();
    String e = reader.readLine();
    String f = "constant";
    String g = a.trim();
    int len = a.length();
  }
}
